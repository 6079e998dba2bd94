#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace mimosim {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

enum class Topology { CellFree, MultiCell };
enum class PrecoderKind { MF, ZF, MMSE };
enum class AllocatorKind { UPA, APA, RAPA };

// Thrown when a channel estimate is too ill-conditioned to invert.
class SingularMatrixError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Thrown by iterative solvers that blow up or fail to reach tolerance.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string to_string(Topology t);
std::string to_string(PrecoderKind k);
std::string to_string(AllocatorKind k);

Topology parse_topology(const std::string& s);
PrecoderKind parse_precoder(const std::string& s);
AllocatorKind parse_allocator(const std::string& s);

}  // namespace mimosim
