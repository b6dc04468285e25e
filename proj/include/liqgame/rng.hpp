#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace liqgame {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

// Counter-based seed for stream `stream` of path `path`: reproducible and
// independent of the order in which paths are simulated.
inline std::uint64_t stream_seed(std::uint64_t master, std::uint64_t path, std::uint64_t stream) {
    return splitmix64(splitmix64(master ^ splitmix64(path + 1)) ^ splitmix64(stream + 0x51ED));
}

// Independent standard-normal streams for one path: stream 0 drives the
// mid-price, stream 1 the signal, streams 2..N+1 the uninformed flows. One
// engine and one distribution per stream, so draws never interleave.
class PathShocks {
public:
    PathShocks(std::uint64_t master_seed, std::uint64_t path_index, int n_brokers)
        : normals_(static_cast<std::size_t>(n_brokers) + 2) {
        engines_.reserve(normals_.size());
        for (std::size_t s = 0; s < normals_.size(); ++s) {
            engines_.emplace_back(stream_seed(master_seed, path_index, s));
        }
    }

    // One draw per node from each stream.
    void next(double& xi_price, double& xi_signal, std::vector<double>& xi_flow) {
        xi_price = normals_[0](engines_[0]);
        xi_signal = normals_[1](engines_[1]);
        for (std::size_t j = 0; j < xi_flow.size(); ++j) {
            xi_flow[j] = normals_[j + 2](engines_[j + 2]);
        }
    }

private:
    std::vector<std::mt19937_64> engines_;
    std::vector<std::normal_distribution<double>> normals_;
};

}  // namespace liqgame
