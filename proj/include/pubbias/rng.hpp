#pragma once

#include <array>
#include <cstdint>

namespace pubbias {

/// Counter-based random stream (Philox4x32-10). The key is derived from
/// (master_seed, stream_id); the counter is the draw index. Identical
/// (master_seed, stream_id) pairs reproduce identical sequences regardless of
/// platform or of which thread consumes the stream.
///
/// Value type: copying a stream copies its position. Do not share one stream
/// across concurrent tasks; give each task its own stream_id instead.
class RngStream {
public:
    RngStream(std::uint64_t master_seed, std::uint64_t stream_id);

    std::uint64_t master_seed() const noexcept { return master_seed_; }
    std::uint64_t stream_id() const noexcept { return stream_id_; }

    std::uint64_t next_u64();
    /// Uniform on the open interval (0, 1), 53-bit resolution.
    double uniform();
    /// Uniform integer in [0, n).
    std::uint64_t uniform_index(std::uint64_t n);
    /// Standard normal via the Marsaglia polar method (only log and sqrt).
    double normal();
    /// Exponential with mean 1.
    double exponential();
    /// Gamma(shape, 1) by Marsaglia-Tsang.
    double gamma(double shape);

private:
    std::array<std::uint32_t, 4> block();

    std::uint64_t master_seed_;
    std::uint64_t stream_id_;
    std::array<std::uint32_t, 2> key_{};
    std::uint64_t counter_ = 0;
    std::array<std::uint32_t, 4> buffer_{};
    int buffered_ = 0;
    double spare_normal_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace pubbias
