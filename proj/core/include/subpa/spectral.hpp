#pragma once

#include <span>
#include <vector>

#include "subpa/model.hpp"

namespace subpa {

// K x K truncation of the flow generator: subdiagonal q0 w(k) feeding class
// k+1, diagonal -q0 w(k), plus the rank-one first row p0 w(k).  Stored as
// the two weight arrays; matrix-vector products run in O(K).
class TruncatedGenerator {
public:
    TruncatedGenerator(const ModelParams& params, int truncation);

    int truncation() const { return K_; }

    // out = A x
    void apply(std::span<const double> x, std::span<double> out) const;

    // Accessors in the combined-diagonal convention: diagonal(1) is
    // (p0 - q0) w(1); first_row(1) is 0 since that entry sits on the
    // diagonal; subdiagonal(k) = q0 w(k) is the flow k -> k+1 for k < K.
    double diagonal(int k) const;
    double first_row(int k) const;
    double subdiagonal(int k) const;

    // Lattice norm |x| = sum k |x_k|.
    double lattice_norm(std::span<const double> x) const;

    double shift() const { return shift_; }  // q0 * W * K

private:
    int K_;
    double p0_, q0_;
    double shift_;
    std::vector<double> q0w_;  // q0 w(k)
    std::vector<double> p0w_;  // p0 w(k)
};

TruncatedGenerator build_generator(const ModelParams& params, int truncation);

// The scalar eigenvalue equation
//   lambda = (p0 - q0) w(1) + p0 w(1) sum_{k>=2} prod_{r=2..k} q0 w(r) / (lambda + q0 w(r))
// has exactly one positive root (left side increasing, right side
// decreasing); it equals the growth rate s*.  Solved by bisection.
double solve_eigenvalue_equation(const ModelParams& params, double tol = 1e-10);

struct Eigenpair {
    double value = 0.0;
    std::vector<double> vector;  // lattice-normalized, positive entries
    long iterations = 0;
    double residual = 0.0;           // |A x - lambda x| lattice, rows < K
    double boundary_residual = 0.0;  // lattice weight of the dropped outflow
    bool positive_ok = false;
    double closed_form_rel_err = 0.0;  // vs the product form, above underflow
};

// Dominant eigenpair of the truncated generator by power iteration on
// A + shift I with shift = q0 W K, in the lattice norm.
Eigenpair dominant_eigenpair(const TruncatedGenerator& op, double tol = 1e-10,
                             long max_iterations = 1'000'000);

struct AdjointEigenvector {
    std::vector<double> values;  // x*_j, x*_1 = 1, all positive
    double max_recursion_residual = 0.0;  // relative, over j < K
    double linear_growth_bound = 0.0;     // max_j x*_j / j
};

// Adjoint eigenvector at lambda* = s*, from the absolutely convergent series
//   x*_j = sum_{k>=j} P_k prod_{r=j..k-1} R_r,
//   R_r = q0 w(r) / (s* + q0 w(r)),  P_k = p0 w(k) / (s* + q0 w(k)),
// normalized to x*_1 = 1.  Verifies the defining recursion
//   x*_j (s* + q0 w(j)) = q0 w(j) x*_{j+1} + p0 w(j) x*_1 componentwise.
AdjointEigenvector adjoint_eigenvector(const ModelParams& params,
                                       double s_star, int truncation);

}  // namespace subpa
