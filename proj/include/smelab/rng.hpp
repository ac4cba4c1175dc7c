#pragma once

#include <cstdint>
#include <random>

namespace smelab {

/// Reproducible per-trajectory random stream. Identical (base_seed, stream_id,
/// space) triples give bit-identical sequences; distinct triples are seeded
/// through std::seed_seq so their engines start in unrelated states.
class RngStream {
 public:
  using engine_type = std::mt19937_64;
  using result_type = engine_type::result_type;

  RngStream(std::uint64_t base_seed, std::uint64_t stream_id, std::uint64_t space = 0)
      : base_seed_(base_seed), stream_id_(stream_id), space_(space), engine_(seed(base_seed, stream_id, space)) {}

  std::uint64_t base_seed() const { return base_seed_; }
  std::uint64_t stream_id() const { return stream_id_; }
  std::uint64_t space() const { return space_; }

  static constexpr result_type min() { return engine_type::min(); }
  static constexpr result_type max() { return engine_type::max(); }
  result_type operator()() { return engine_(); }

  double normal() { return normal_(engine_); }
  double uniform() { return std::generate_canonical<double, 53>(engine_); }
  bool bernoulli(double p) { return uniform() < p; }
  std::uint64_t uniform_index(std::uint64_t size) {
    return std::uniform_int_distribution<std::uint64_t>(0, size - 1)(engine_);
  }

 private:
  static engine_type seed(std::uint64_t base, std::uint64_t id, std::uint64_t space) {
    auto lo = [](std::uint64_t v) { return std::uint32_t(v & 0xffffffffu); };
    auto hi = [](std::uint64_t v) { return std::uint32_t(v >> 32); };
    std::seed_seq seq{lo(base), hi(base), lo(space), hi(space), lo(id), hi(id)};
    return engine_type(seq);
  }

  std::uint64_t base_seed_;
  std::uint64_t stream_id_;
  std::uint64_t space_;
  engine_type engine_;
  std::normal_distribution<double> normal_;
};

}  // namespace smelab
