#pragma once

#include "backstep/grid.hpp"
#include "backstep/kernel.hpp"

namespace backstep {

// K, L integrate over [0, x]; P, R over [x, 1].
//   K[f] = f - int k f,  L[f] = f + int l f,  P[f] = f - int p f,  R[f] = f + int r f
enum class TransformKind { K, L, P, R };

KernelKind kernel_kind_for(TransformKind kind) noexcept;

/// Applies a Volterra transform with the end-corrected composite rule of
/// quadrature_weight. Diagonal kernel values enter the quadrature directly.
StateField apply_transform(TransformKind kind, const KernelField& kernel, const StateField& f);

enum class TransformPair { KL, PR };

/// Sup-norm of second(first(f)) - f. The pair members are taken in the order
/// the kernels are passed: (first_kernel, second_kernel).
double composition_defect(const KernelField& first_kernel, const KernelField& second_kernel,
                          const StateField& f);

// Convenience overload: picks the two kernels for `pair` in forward order
// (K then L, or P then R).
double composition_defect(TransformPair pair, const KernelField& forward,
                          const KernelField& inverse, const StateField& f);

/// U = int_0^1 k(1, y) u_hat(y) dy.
double control_signal(const KernelField& k_field, const StateField& u_hat);

// Quadrature weights w_j with control_signal(k, u) = sum_j w_j u_j.
std::vector<double> control_weights(const KernelField& k_field);

}  // namespace backstep
