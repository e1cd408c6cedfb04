#ifndef NUFHT_ERRORS_HPP
#define NUFHT_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace nufht {

// An adaptive procedure ran out of its refinement budget before meeting
// its tolerance. The command line tool maps this to exit status 3.
class ConvergenceError : public std::runtime_error {
 public:
  explicit ConvergenceError(const std::string& what) : std::runtime_error(what) {}
};

// The Helmholtz operator is singular for the requested wavenumber: kappa^2
// coincides with a Dirichlet eigenvalue j_{l,j}^2 of the unit disk.
class ResonanceError : public std::runtime_error {
 public:
  ResonanceError(const std::string& what, int j, int ell)
      : std::runtime_error(what), j_(j), ell_(ell) {}

  int radial_index() const { return j_; }
  int angular_order() const { return ell_; }

 private:
  int j_;
  int ell_;
};

}  // namespace nufht

#endif  // NUFHT_ERRORS_HPP
