#pragma once

#include <Eigen/Dense>

namespace mixcal {

// exp(A) for a small dense complex matrix by scaling and squaring with a
// degree-13 Pade approximant (Higham 2005 parameters).
Eigen::MatrixXcd matrix_exponential(const Eigen::MatrixXcd& a);

}  // namespace mixcal
