#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "exsieve/errors.hpp"

namespace exsieve {

using u32 = std::uint32_t;
using u64 = std::uint64_t;
using u128 = unsigned __int128;

struct PrimePower {
    u64 prime;
    u32 exponent;

    bool operator==(const PrimePower&) const = default;
};

// An integer together with its full prime factorization,
// primes strictly increasing, exponents >= 1.  value == 1 iff factors empty.
struct FactoredInteger {
    u64 value = 1;
    std::vector<PrimePower> factors;

    bool operator==(const FactoredInteger&) const = default;
};

// Smallest-prime-factor table for 2..limit, built with a linear sieve.
// Capacity ceiling: limit <= 2^31 (uint32 entries; ~4 bytes per value,
// so the full ceiling needs ~8.6 GB and is bounded in practice by RAM).
class SpfTable {
public:
    static constexpr u64 kMaxLimit = u64{1} << 31;

    explicit SpfTable(u64 limit);

    u64 limit() const { return limit_; }

    // n in [2, limit]
    u64 spf(u64 n) const { return spf_[n]; }

private:
    u64 limit_;
    std::vector<u32> spf_;
};

SpfTable build_spf_table(u64 limit);

// A sieved half-open range [lo, hi) carrying phi, sigma and smallest
// prime factor per element.  All values exact in 64-bit arithmetic.
struct ArithRange {
    u64 lo = 1;
    u64 hi = 2;
    std::vector<u64> phi;
    std::vector<u64> sigma;
    std::vector<u64> spf;

    u64 size() const { return hi - lo; }
    u64 phi_at(u64 n) const { return phi[n - lo]; }
    u64 sigma_at(u64 n) const { return sigma[n - lo]; }
    u64 spf_at(u64 n) const { return spf[n - lo]; }
};

// Elements per worker segment; three u64 arrays of this length stay
// comfortably inside a per-core L2/L3 budget (~6 MiB of scratch).
inline constexpr u64 kDefaultSegmentLength = u64{1} << 18;

// sieve_arith_range rejects hi above this; keeps every sigma product
// and intermediate prime-power strictly inside u64.
inline constexpr u64 kMaxRangeValue = u64{1} << 40;

// Requires every prime <= floor(sqrt(hi-1)) to be present (sorted) in
// `primes`; missing primes raise PreconditionError.
ArithRange sieve_arith_range(u64 lo, u64 hi, std::span<const u64> primes);

std::vector<u64> primes_up_to(u64 n);

u64 isqrt(u64 n);

// With a table (n <= table.limit()) factorization is a chain of spf
// divisions; otherwise trial division plus Pollard rho splitting,
// correct for all 64-bit n.
FactoredInteger factorize(u64 n, const SpfTable* table = nullptr);

u64 euler_phi(u64 n);
u64 euler_phi(const FactoredInteger& f);

// CapacityError if sigma(n) does not fit in u64.
u64 sigma_divisors(u64 n);
u64 sigma_divisors(const FactoredInteger& f);

// P(n); P(1) = 1.
u64 largest_prime_factor(u64 n);

// Deterministic for all n < 2^64 (strong-pseudoprime bases 2..37).
bool is_prime(u64 n);

// smooth_count allocates 4 bytes per value up to x.
inline constexpr u64 kSmoothCountCap = 100'000'000;

// Psi(x, y) = #{n <= x : P(n) <= y}; counts n = 1 since P(1) = 1.
u64 smooth_count(u64 x, u64 y);

}  // namespace exsieve
