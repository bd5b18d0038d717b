#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace mission {

/// Base class for every error raised by the library. `stage()` names the
/// pipeline stage that produced it so the CLI can map it to an exit code.
class Error : public std::runtime_error {
 public:
  Error(std::string stage, const std::string& what)
      : std::runtime_error(what), stage_(std::move(stage)) {}
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

// ---------------------------------------------------------------------------
// Hashing

/// 64-bit FNV-1a. Used for content-addressed stage caching and catalog hashes.
class Fnv1a {
 public:
  Fnv1a& update(std::string_view bytes) {
    for (unsigned char c : bytes) {
      state_ ^= c;
      state_ *= 0x100000001b3ULL;
    }
    return *this;
  }
  Fnv1a& update(std::uint64_t v) {
    char buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    return update(std::string_view(buf, 8));
  }
  std::uint64_t digest() const { return state_; }
  std::string hex() const;

 private:
  std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

std::uint64_t fnv1a(std::string_view bytes);
std::string to_hex(std::uint64_t v);
/// Hash of a file's full contents; throws Error("io", ...) if unreadable.
std::uint64_t hash_file(const std::string& path);

// ---------------------------------------------------------------------------
// Random numbers
//
// The standard <random> distributions are implementation-defined, so the
// sampling routines below are written out to keep seeded output identical
// across toolchains.

std::uint64_t splitmix64(std::uint64_t& state);

/// Derive a child seed from a parent seed plus a (name, index) pair.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view name, std::uint64_t index = 0);

class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64();
  /// Uniform in [0, 1).
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer in [lo, hi] inclusive.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);
  double normal();
  double exponential(double rate);
  double gamma(double shape);
  double beta(double a, double b);
  std::vector<double> dirichlet(std::span<const double> alpha);
  bool bernoulli(double p) { return uniform() < p; }

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      auto j = static_cast<std::size_t>(uniform_int(0, static_cast<std::int64_t>(i) - 1));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::uint64_t s_[4];
};

// ---------------------------------------------------------------------------
// Descriptive statistics

/// Median with the even-count rule (mean of the central pair). nullopt on empty.
std::optional<double> median(std::vector<double> values);
/// Linear-interpolation quantile (q in [0,1]) over unsorted input. nullopt on empty.
std::optional<double> quantile(std::vector<double> values, double q);
double mean(std::span<const double> values);
/// Population standard deviation.
double population_stddev(std::span<const double> values);

struct FiveNumber {
  double min, q1, median, q3, max;
};
std::optional<FiveNumber> five_number_summary(std::vector<double> values);

// ---------------------------------------------------------------------------
// Threads

/// Run fn(i) for i in [0, n) on up to `jobs` threads. Work is handed out by
/// index, so results stored per index are independent of scheduling. The
/// first exception thrown is rethrown after all threads join.
void parallel_for(std::size_t n, unsigned jobs, const std::function<void(std::size_t)>& fn);

// ---------------------------------------------------------------------------
// Small string helpers

std::string to_lower_ascii(std::string_view s);
std::vector<std::string> split_whitespace(std::string_view s);
std::string trim(std::string_view s);
/// Number of UTF-8 code points (invalid bytes count as one each).
std::size_t utf8_length(std::string_view s);
/// Shortest round-trip representation of a double, as used in JSON output.
std::string format_double(double v);

}  // namespace mission
