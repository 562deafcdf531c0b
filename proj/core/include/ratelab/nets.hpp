#pragma once

#include <cstddef>
#include <vector>

#include "ratelab/quantization.hpp"

namespace ratelab {

// Axis-aligned grid net over the codebook parameter box (-rho, rho)^(d*k).
// The projection moves each parameter to its cell center, so the parameter
// distance to the net is at most mesh * sqrt(d*k) / 2 and the L2(P) loss
// distance is at most epsilon = sqrt(L) * mesh * sqrt(d*k) / 2 whenever the
// loss is L-Lipschitz in squared parameter distance.
class EpsilonNet {
public:
    EpsilonNet(double rho, int d, int k, int cells_per_axis, double requested_mesh,
               double lipschitz_l);

    double rho() const { return rho_; }
    int d() const { return d_; }
    int k() const { return k_; }
    int cells_per_axis() const { return cells_; }
    double mesh() const { return mesh_; }                    // actual spacing, <= requested
    double requested_mesh() const { return requested_mesh_; }
    double lipschitz_l() const { return lipschitz_l_; }
    // Certified L2(P) radius, derived from the actual grid spacing.
    double epsilon() const;

    std::size_t member_count() const { return count_; }
    Codebook member(std::size_t index) const;
    // All members; refuses to materialize more than 10^7 points.
    std::vector<Codebook> members() const;

    std::size_t project_index(const Codebook& cb) const;
    Codebook project(const Codebook& cb) const;

private:
    double rho_;
    int d_;
    int k_;
    int cells_;
    double requested_mesh_;
    double mesh_;
    double lipschitz_l_;
    std::size_t count_;
};

// Net with certified radius epsilon: mesh = 2 epsilon / sqrt(L * d * k).
// Refuses nets above 10^8 members.
EpsilonNet build_net(double rho, int d, int k, double epsilon, double lipschitz_l);

// Net from an explicit grid spacing; epsilon derived from the invariant.
EpsilonNet build_net_mesh(double rho, int d, int k, double mesh, double lipschitz_l);

struct EntropyCheck {
    double log_count = 0.0;
    double bound = 0.0;
    bool holds = false;
    double k_min_at_kd = 0.0;  // smallest K satisfying the bound at C = k(d+1)
};

// log |members| <= c_entropy * log(k_entropy / epsilon); requires
// epsilon <= k_entropy.
EntropyCheck entropy_check(const EpsilonNet& net, double c_entropy, double k_entropy);

}  // namespace ratelab
