#include "ratelab/nets.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ratelab {

namespace {
[[noreturn]] void bad_param(const std::string& msg) { throw std::invalid_argument(msg); }

std::size_t checked_count(int cells, int dims) {
    double log_count = dims * std::log(static_cast<double>(cells));
    if (log_count > std::log(1e8))
        throw std::invalid_argument("net would exceed 1e8 members; refusing to build");
    std::size_t count = 1;
    for (int i = 0; i < dims; ++i) count *= static_cast<std::size_t>(cells);
    return count;
}
}  // namespace

EpsilonNet::EpsilonNet(double rho, int d, int k, int cells_per_axis, double requested_mesh,
                       double lipschitz_l)
    : rho_(rho),
      d_(d),
      k_(k),
      cells_(cells_per_axis),
      requested_mesh_(requested_mesh),
      mesh_(2.0 * rho / cells_per_axis),
      lipschitz_l_(lipschitz_l),
      count_(checked_count(cells_per_axis, d * k)) {
    if (!(rho > 0.0)) bad_param("EpsilonNet: rho must be > 0");
    if (d < 1 || k < 1) bad_param("EpsilonNet: d and k must be >= 1");
    if (cells_per_axis < 1) bad_param("EpsilonNet: cells_per_axis must be >= 1");
    if (!(lipschitz_l > 0.0)) bad_param("EpsilonNet: lipschitz_l must be > 0");
}

double EpsilonNet::epsilon() const {
    // Certified from the actual grid spacing, which never exceeds the
    // requested mesh.
    const double dk = static_cast<double>(d_) * k_;
    return std::sqrt(lipschitz_l_) * std::min(mesh_, requested_mesh_) * std::sqrt(dk) / 2.0;
}

Codebook EpsilonNet::member(std::size_t index) const {
    if (index >= count_) bad_param("EpsilonNet::member: index out of range");
    const int dims = d_ * k_;
    Codebook cb;
    cb.k = k_;
    cb.d = d_;
    cb.rho = rho_;
    cb.centers.resize(static_cast<std::size_t>(dims));
    // Lexicographic: the last coordinate varies fastest.
    std::size_t rest = index;
    for (int t = dims - 1; t >= 0; --t) {
        const auto j = rest % static_cast<std::size_t>(cells_);
        rest /= static_cast<std::size_t>(cells_);
        cb.centers[static_cast<std::size_t>(t)] =
            -rho_ + mesh_ * (static_cast<double>(j) + 0.5);
    }
    return cb;
}

std::vector<Codebook> EpsilonNet::members() const {
    if (count_ > 10'000'000)
        throw std::invalid_argument("EpsilonNet::members: too many members to materialize");
    std::vector<Codebook> out;
    out.reserve(count_);
    for (std::size_t i = 0; i < count_; ++i) out.push_back(member(i));
    return out;
}

std::size_t EpsilonNet::project_index(const Codebook& cb) const {
    if (cb.d != d_ || cb.k != k_) bad_param("EpsilonNet::project: shape mismatch");
    const int dims = d_ * k_;
    std::size_t index = 0;
    for (int t = 0; t < dims; ++t) {
        const double u = (cb.centers[static_cast<std::size_t>(t)] + rho_) / mesh_ - 0.5;
        const double lo = std::floor(u);
        // Nearest cell center; exact midpoints resolve to the lower index.
        long long j = static_cast<long long>(lo) + ((u - lo > 0.5) ? 1 : 0);
        j = std::max(0LL, std::min<long long>(j, cells_ - 1));
        index = index * static_cast<std::size_t>(cells_) + static_cast<std::size_t>(j);
    }
    return index;
}

Codebook EpsilonNet::project(const Codebook& cb) const { return member(project_index(cb)); }

EpsilonNet build_net(double rho, int d, int k, double epsilon, double lipschitz_l) {
    if (!(epsilon > 0.0)) bad_param("build_net: epsilon must be > 0");
    if (!(lipschitz_l > 0.0)) bad_param("build_net: lipschitz_l must be > 0");
    const double dk = static_cast<double>(d) * k;
    const double mesh = 2.0 * epsilon / (std::sqrt(lipschitz_l) * std::sqrt(dk));
    return build_net_mesh(rho, d, k, mesh, lipschitz_l);
}

EpsilonNet build_net_mesh(double rho, int d, int k, double mesh, double lipschitz_l) {
    if (!(mesh > 0.0)) bad_param("build_net_mesh: mesh must be > 0");
    if (!(rho > 0.0)) bad_param("build_net_mesh: rho must be > 0");
    const int cells = std::max(1, static_cast<int>(std::ceil(2.0 * rho / mesh - 1e-12)));
    // The count guard runs before any allocation.
    checked_count(cells, d * k);
    return EpsilonNet(rho, d, k, cells, mesh, lipschitz_l);
}

EntropyCheck entropy_check(const EpsilonNet& net, double c_entropy, double k_entropy) {
    if (!(c_entropy > 0.0)) bad_param("entropy_check: c_entropy must be > 0");
    if (!(net.epsilon() <= k_entropy))
        bad_param("entropy_check: requires epsilon <= k_entropy");
    EntropyCheck out;
    const double dims = static_cast<double>(net.d()) * net.k();
    out.log_count = dims * std::log(static_cast<double>(net.cells_per_axis()));
    out.bound = c_entropy * std::log(k_entropy / net.epsilon());
    out.holds = out.log_count <= out.bound + 1e-12;
    const double c_kd = static_cast<double>(net.k()) * (net.d() + 1);
    out.k_min_at_kd = net.epsilon() * std::exp(out.log_count / c_kd);
    return out;
}

}  // namespace ratelab
