#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace ratelab {

// Constants shared by the rate machinery. r is the loss integrability order,
// c_entropy/k_entropy the covering-number constants, w_envelope the L^r bound
// on the class envelope.
struct BoundParams {
    double r = 4.0;
    double c_entropy = 1.0;
    double k_entropy = 1.0;
    double w_envelope = 1.0;
    double rho = 1.0;
    double delta = 0.1;
    double n = 1.0;
};

// Throws std::invalid_argument on violated invariants (r >= c_entropy + 1,
// positivity, delta in (0,1)). Rate-level operations additionally require
// r >= 4 * c_entropy and say so in their diagnostics.
void validate(const BoundParams& params);

struct BernsteinPiece {
    std::string label;
    double b = 1.0;       // scale constant, > 0
    double gamma = 1.0;   // exponent, in (0, 1]
};

struct BernsteinProfile {
    enum class Provenance { Assumed, Estimated };
    std::vector<BernsteinPiece> pieces;
    Provenance provenance = Provenance::Assumed;
};

void validate(const BernsteinProfile& profile);

// max{ l^2/r - (1-beta) l + beta C,  [beta (1 - alpha/2) - 1/2] l + beta C }.
// Negative values make the union-bound failure probability summable.
double exponent_a(double l, double r, double c_entropy, double beta, double alpha);

// Open interval (0, beta_max) of rate exponents admissible at Bernstein
// exponent alpha, with the witness l = r (1 - beta)/2 that certifies
// exponent_a < 0. Empty (with a diagnostic) when r < 4 * c_entropy.
struct BetaInterval {
    double beta_max = 0.0;
    double r = 0.0;
    bool empty = true;
    std::string diagnostic;

    bool contains(double beta) const { return !empty && beta > 0.0 && beta < beta_max; }
    double witness_l(double beta) const { return 0.5 * r * (1.0 - beta); }
};

BetaInterval admissible_beta(double r, double c_entropy, double alpha);

// Tail bound for the supremum V of empirical means of a nonnegative family:
// P[V >= (1+zeta) E V + x] <= min_l (1/x)^l [ c(zeta) (l/n)^(1-l/r) M
//                                             + 4 sigma sqrt(l/n) ]^l,
// minimized over real l in [1, r] (512-point grid plus the integers).
// c(zeta) = 64/zeta + zeta + 7 unless an override is supplied; the override
// exists because downstream rate arguments quote a smaller constant at
// zeta = 1/2 (50 vs 135.5) and the gap is unresolved. The result may exceed 1
// (vacuous). M = sigma = 0 returns 0.
struct TailBound {
    double bound = 0.0;
    double argmin_l = 1.0;
};

TailBound lederer_tail(double n, double r, double m_envelope, double sigma, double zeta,
                       double x, std::optional<double> constant_override = std::nullopt);

// ||u||_L2 <= ||u||_L1^((r-2)/(2r-2)) * ||u||_Lr^(r/(2r-2)) under the
// empirical measure of a weighted nonnegative sample. Empty weights mean
// equal weighting.
struct HolderCheck {
    double lhs = 0.0;
    double rhs = 0.0;
    bool holds = false;
};

HolderCheck reverse_holder_check(std::span<const double> values, double r,
                                 std::span<const double> weights = {});

// Explicit bound for the implicit inequality x <= a x^nu + b:
// x <= C1 a^(1/(1-nu)) + C2 b with C1 = 2 (1-nu) (2 nu)^(nu/(1-nu)), C2 = 2.
double implicit_bound(double a, double b, double nu);

struct ImplicitBoundConstants {
    double c1 = 0.0;
    double c2 = 2.0;
};
ImplicitBoundConstants implicit_bound_constants(double nu);

// beta_max = min over profile pieces of admissible_beta(r, C, gamma_i);
// equals (1 - 2 sqrt(C/r)) / (2 - min gamma).
BetaInterval guaranteed_rate(const BoundParams& params, const BernsteinProfile& profile);

// Quantization instance: beta_max = ((r-1)/r)(1 - 2 sqrt(k(d+1)/r)),
// requiring r >= 4 k (d+1).
BetaInterval kmeans_rate(double r, int k, int d);

// Far-field Bernstein constants: for risks R(f) >= threshold_ratio * R(f*),
// E[(dloss)^2] <= b * (E dloss)^gamma with gamma = (r-2)/(r-1), b = 2 alpha^gamma.
// Requires alpha > m_threshold = W^(r/(r-2)).
struct FarFieldBernstein {
    double b = 0.0;
    double gamma = 0.0;
    double m_threshold = 0.0;
    double threshold_ratio = 0.0;
};

FarFieldBernstein far_field_bernstein(double w_envelope, double r, double alpha);

}  // namespace ratelab
