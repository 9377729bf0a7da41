#include "mixcal/matrix_exponential.hpp"

#include <array>
#include <cmath>

#include "mixcal/errors.hpp"

namespace mixcal {
namespace {

constexpr double kTheta13 = 5.371920351148152;

constexpr std::array<double, 14> kPade13 = {64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
                                            1187353796428800.0,  129060195264000.0,   10559470521600.0,
                                            670442572800.0,      33522128640.0,       1323241920.0,
                                            40840800.0,          960960.0,            16380.0,
                                            182.0,               1.0};

}  // namespace

Eigen::MatrixXcd matrix_exponential(const Eigen::MatrixXcd& a) {
  if (a.rows() != a.cols()) throw DomainError("matrix exponential needs a square matrix");
  const Eigen::Index n = a.rows();
  if (n == 0) return a;

  const double norm1 = a.cwiseAbs().colwise().sum().maxCoeff();
  int squarings = 0;
  if (norm1 > kTheta13) squarings = static_cast<int>(std::ceil(std::log2(norm1 / kTheta13)));
  const Eigen::MatrixXcd s = a / std::ldexp(1.0, squarings);

  const auto& b = kPade13;
  const Eigen::MatrixXcd ident = Eigen::MatrixXcd::Identity(n, n);
  const Eigen::MatrixXcd s2 = s * s;
  const Eigen::MatrixXcd s4 = s2 * s2;
  const Eigen::MatrixXcd s6 = s4 * s2;

  const Eigen::MatrixXcd u_inner = s6 * (b[13] * s6 + b[11] * s4 + b[9] * s2) + b[7] * s6 + b[5] * s4 + b[3] * s2 + b[1] * ident;
  const Eigen::MatrixXcd u = s * u_inner;
  const Eigen::MatrixXcd v = s6 * (b[12] * s6 + b[10] * s4 + b[8] * s2) + b[6] * s6 + b[4] * s4 + b[2] * s2 + b[0] * ident;

  Eigen::MatrixXcd r = (v - u).partialPivLu().solve(v + u);
  for (int k = 0; k < squarings; ++k) r = r * r;
  return r;
}

}  // namespace mixcal
