#include "exsieve/arith.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <string>

namespace exsieve {

namespace {

u64 mulmod(u64 a, u64 b, u64 m) {
    return static_cast<u64>(static_cast<u128>(a) * b % m);
}

u64 powmod(u64 base, u64 exp, u64 m) {
    u64 result = 1;
    base %= m;
    while (exp > 0) {
        if (exp & 1) result = mulmod(result, base, m);
        base = mulmod(base, base, m);
        exp >>= 1;
    }
    return result;
}

bool miller_rabin(u64 n, u64 a) {
    u64 d = n - 1;
    int s = 0;
    while ((d & 1) == 0) {
        d >>= 1;
        ++s;
    }
    u64 x = powmod(a, d, n);
    if (x == 1 || x == n - 1) return true;
    for (int i = 1; i < s; ++i) {
        x = mulmod(x, x, n);
        if (x == n - 1) return true;
    }
    return false;
}

u64 pollard_rho(u64 n) {
    // Brent's cycle variant; n must be odd composite, not a prime power
    // divisible by a small prime (callers strip those first).
    if ((n & 1) == 0) return 2;
    for (u64 c = 1;; ++c) {
        auto step = [n, c](u64 x) { return (mulmod(x, x, n) + c) % n; };
        u64 x = 2, y = 2, d = 1;
        u64 q = 1;
        int count = 0;
        while (d == 1) {
            x = step(x);
            y = step(step(y));
            u64 diff = x > y ? x - y : y - x;
            if (diff == 0) break;
            q = mulmod(q, diff, n);
            if (++count % 64 == 0) {
                d = std::gcd(q, n);
                if (d != 1) break;
            }
        }
        if (d == 1) d = std::gcd(q, n);
        if (d != 1 && d != n) return d;
    }
}

void factor_recursive(u64 n, std::vector<u64>& out) {
    if (n == 1) return;
    if (is_prime(n)) {
        out.push_back(n);
        return;
    }
    u64 d = pollard_rho(n);
    factor_recursive(d, out);
    factor_recursive(n / d, out);
}

}  // namespace

bool is_prime(u64 n) {
    if (n < 2) return false;
    constexpr std::array<u64, 12> kBases{2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};
    for (u64 p : kBases) {
        if (n == p) return true;
        if (n % p == 0) return false;
    }
    for (u64 a : kBases) {
        if (!miller_rabin(n, a)) return false;
    }
    return true;
}

u64 isqrt(u64 n) {
    if (n == 0) return 0;
    u64 r = static_cast<u64>(std::sqrt(static_cast<double>(n)));
    while (r > 0 && r > n / r) --r;
    while ((r + 1) <= n / (r + 1)) ++r;
    return r;
}

std::vector<u64> primes_up_to(u64 n) {
    std::vector<u64> primes;
    if (n < 2) return primes;
    std::vector<bool> composite(n + 1, false);
    for (u64 i = 2; i <= n; ++i) {
        if (composite[i]) continue;
        primes.push_back(i);
        for (u64 j = i * i; j <= n; j += i) composite[j] = true;
    }
    return primes;
}

SpfTable::SpfTable(u64 limit) : limit_(limit) {
    if (limit < 2 || limit > kMaxLimit) {
        throw CapacityError("SpfTable limit must be in [2, 2^31], got " +
                            std::to_string(limit));
    }
    spf_.assign(limit + 1, 0);
    std::vector<u32> primes;
    for (u64 i = 2; i <= limit; ++i) {
        if (spf_[i] == 0) {
            spf_[i] = static_cast<u32>(i);
            primes.push_back(static_cast<u32>(i));
        }
        for (u32 p : primes) {
            if (p > spf_[i] || i * p > limit) break;
            spf_[i * p] = p;
        }
    }
}

SpfTable build_spf_table(u64 limit) { return SpfTable(limit); }

ArithRange sieve_arith_range(u64 lo, u64 hi, std::span<const u64> primes) {
    if (lo < 1 || lo >= hi) {
        throw PreconditionError("sieve_arith_range requires 1 <= lo < hi");
    }
    if (hi > kMaxRangeValue) {
        throw CapacityError("sieve_arith_range hi exceeds " +
                            std::to_string(kMaxRangeValue));
    }
    if (!std::is_sorted(primes.begin(), primes.end())) {
        throw PreconditionError("prime seed list must be sorted");
    }
    const u64 root = isqrt(hi - 1);
    // The seed list must contain every prime <= sqrt(hi-1); regenerating
    // them locally is cheap relative to the range work and makes a missing
    // prime a hard error instead of a silently wrong sieve.
    for (u64 p : primes_up_to(root)) {
        if (!std::binary_search(primes.begin(), primes.end(), p)) {
            throw PreconditionError("prime seed list is missing prime " +
                                    std::to_string(p));
        }
    }

    ArithRange range;
    range.lo = lo;
    range.hi = hi;
    const u64 n = hi - lo;
    range.phi.assign(n, 1);
    range.sigma.assign(n, 1);
    range.spf.assign(n, 0);
    std::vector<u64> rem(n);
    for (u64 i = 0; i < n; ++i) rem[i] = lo + i;

    for (u64 p : primes) {
        if (p > root) break;
        u64 start = ((lo + p - 1) / p) * p;
        for (u64 j = start; j < hi; j += p) {
            const u64 i = j - lo;
            u64 pk = 1;
            while (rem[i] % p == 0) {
                rem[i] /= p;
                pk *= p;
            }
            range.phi[i] *= pk / p * (p - 1);
            range.sigma[i] *= (pk * p - 1) / (p - 1);
            if (range.spf[i] == 0) range.spf[i] = p;
        }
    }
    for (u64 i = 0; i < n; ++i) {
        if (rem[i] > 1) {
            // leftover is a single prime > sqrt(hi-1)
            range.phi[i] *= rem[i] - 1;
            range.sigma[i] *= rem[i] + 1;
            if (range.spf[i] == 0) range.spf[i] = rem[i];
        } else if (lo + i == 1) {
            range.spf[i] = 1;
        }
    }
    return range;
}

FactoredInteger factorize(u64 n, const SpfTable* table) {
    if (n == 0) throw DomainError("factorize requires n >= 1");
    FactoredInteger f;
    f.value = n;
    if (n == 1) return f;

    std::vector<u64> primes;
    if (table != nullptr && n <= table->limit()) {
        while (n > 1) {
            primes.push_back(table->spf(n));
            n /= primes.back();
        }
    } else {
        for (u64 p : {u64{2}, u64{3}, u64{5}, u64{7}, u64{11}, u64{13}}) {
            while (n % p == 0) {
                primes.push_back(p);
                n /= p;
            }
        }
        u64 d = 17;
        while (d <= 100000 && d <= n / d) {
            while (n % d == 0) {
                primes.push_back(d);
                n /= d;
            }
            d += 2;
        }
        factor_recursive(n, primes);
    }
    std::sort(primes.begin(), primes.end());
    for (u64 p : primes) {
        if (!f.factors.empty() && f.factors.back().prime == p) {
            ++f.factors.back().exponent;
        } else {
            f.factors.push_back({p, 1});
        }
    }
    return f;
}

u64 euler_phi(const FactoredInteger& f) {
    u64 result = f.value;
    for (const auto& [p, e] : f.factors) result = result / p * (p - 1);
    return result;
}

u64 euler_phi(u64 n) { return euler_phi(factorize(n)); }

u64 sigma_divisors(const FactoredInteger& f) {
    u128 result = 1;
    for (const auto& [p, e] : f.factors) {
        // p^e <= value < 2^64, so pk = p^(e+1) < 2^128: no u128 overflow.
        u128 pk = 1;
        for (u32 i = 0; i <= e; ++i) pk *= p;
        const u128 term = (pk - 1) / (p - 1);
        if (term > UINT64_MAX || result > static_cast<u128>(UINT64_MAX) / term) {
            throw CapacityError("sigma overflows 64 bits at n=" +
                                std::to_string(f.value));
        }
        result *= term;
    }
    return static_cast<u64>(result);
}

u64 sigma_divisors(u64 n) { return sigma_divisors(factorize(n)); }

u64 largest_prime_factor(u64 n) {
    if (n == 1) return 1;
    return factorize(n).factors.back().prime;
}

u64 smooth_count(u64 x, u64 y) {
    if (x == 0 || y == 0) throw DomainError("smooth_count requires x, y >= 1");
    if (y >= x) return x;
    if (x > kSmoothCountCap) {
        throw CapacityError("smooth_count x exceeds cap " +
                            std::to_string(kSmoothCountCap));
    }
    // lpf[j] ends as the largest prime factor of j because ascending
    // primes overwrite earlier marks.
    std::vector<u32> lpf(x + 1, 1);
    for (u64 i = 2; i <= x; ++i) {
        if (lpf[i] != 1) continue;
        for (u64 j = i; j <= x; j += i) lpf[j] = static_cast<u32>(i);
    }
    u64 count = 0;
    for (u64 j = 1; j <= x; ++j) {
        if (lpf[j] <= y) ++count;
    }
    return count;
}

}  // namespace exsieve
