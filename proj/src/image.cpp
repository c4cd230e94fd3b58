#include "exsieve/image.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <memory>
#include <mutex>
#include <string>
#include <thread>

namespace exsieve {

namespace {

constexpr u64 kDefaultScanCapCototient = 900'000'000;  // exact X <= 3*10^4
constexpr u64 kDefaultScanCapRobbins = 100'000'000;    // exact X <= 10^4

// Shared attainment bitmap; fetch_or marking is idempotent, so results
// are bit-identical for any worker count and segment size.
class AtomicBits {
public:
    explicit AtomicBits(u64 limit)
        : limit_(limit),
          nwords_((limit + 63) / 64),
          words_(std::make_unique<std::atomic<u64>[]>(nwords_)) {
        for (u64 i = 0; i < nwords_; ++i) words_[i].store(0, std::memory_order_relaxed);
    }

    void set(u64 value) {
        const u64 bit = value - 1;
        words_[bit >> 6].fetch_or(u64{1} << (bit & 63), std::memory_order_relaxed);
    }

    std::vector<u64> take() const {
        std::vector<u64> out(nwords_);
        for (u64 i = 0; i < nwords_; ++i) out[i] = words_[i].load(std::memory_order_relaxed);
        if (limit_ % 64 != 0 && nwords_ > 0) {
            out.back() &= (u64{1} << (limit_ % 64)) - 1;
        }
        return out;
    }

private:
    u64 limit_;
    u64 nwords_;
    std::unique_ptr<std::atomic<u64>[]> words_;
};

unsigned effective_workers(const BuildOptions& opt) {
    if (opt.workers != 0) return opt.workers;
    unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : hc;
}

// Runs fn over disjoint sieved segments of [lo, hi); fn must be
// thread-safe (it only marks the shared atomic bitmap).
template <typename Fn>
void parallel_scan(u64 lo, u64 hi, const BuildOptions& opt, Fn&& fn) {
    if (lo >= hi) return;
    const auto primes = primes_up_to(isqrt(hi - 1));
    const u64 seglen = std::max<u64>(opt.segment_length, 1024);
    const unsigned nworkers = effective_workers(opt);

    if (hi - lo <= seglen || nworkers == 1) {
        for (u64 s = lo; s < hi; s += seglen) {
            fn(sieve_arith_range(s, std::min(s + seglen, hi), primes));
        }
        return;
    }

    std::atomic<u64> cursor{lo};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto work = [&] {
        try {
            for (;;) {
                const u64 s = cursor.fetch_add(seglen, std::memory_order_relaxed);
                if (s >= hi) return;
                fn(sieve_arith_range(s, std::min(s + seglen, hi), primes));
            }
        } catch (...) {
            std::scoped_lock lock(error_mutex);
            if (!error) error = std::current_exception();
        }
    };
    std::vector<std::thread> threads;
    threads.reserve(nworkers);
    for (unsigned i = 0; i < nworkers; ++i) threads.emplace_back(work);
    for (auto& t : threads) t.join();
    if (error) std::rethrow_exception(error);
}

struct TwoAdic {
    u32 alpha;
    u64 k;
};

TwoAdic split2(u64 m) {
    u32 alpha = 0;
    while ((m & 1) == 0) {
        m >>= 1;
        ++alpha;
    }
    return {alpha, m};
}

u64 checked_square(u64 x) {
    const u128 sq = static_cast<u128>(x) * x;
    if (sq > UINT64_MAX) {
        throw CapacityError("square scan bound overflows 64 bits for X=" +
                            std::to_string(x));
    }
    return static_cast<u64>(sq);
}

void require_scan(u64 needed, u64 cap, const char* what) {
    if (needed > cap) {
        throw CapacityError(std::string(what) + " requires a scan to " +
                            std::to_string(needed) + " but the ceiling is " +
                            std::to_string(cap) +
                            " (set EXCEPTION_SIEVE_MAX_SCAN to raise it)");
    }
}

// robbins preimage prime p = 2^(alpha+1) w + 1; w <= k^2 gives p <= 2mk + 1.
u64 robbins_prime_ceiling(u64 m) {
    const TwoAdic s = split2(m);
    const u128 p = 2 * static_cast<u128>(m) * s.k + 1;
    return p > UINT64_MAX ? UINT64_MAX : static_cast<u64>(p);
}

// Marks every attained robbins target 2^alpha * k <= limit witnessed by
// odd w in the segment.
void mark_robbins_segment(const ArithRange& range, u64 limit, AtomicBits& bits) {
    u64 n = range.lo | 1;
    if (n < 3) n = 3;
    for (; n < range.hi; n += 2) {
        const u64 k = n - range.phi_at(n);
        if (k < 3 || k > limit) continue;
        u32 alpha = 0;
        for (u64 m = k; m <= limit; m <<= 1, ++alpha) {
            const u64 p = (n << (alpha + 1)) + 1;
            if (p >> (alpha + 1) != n) {
                throw CapacityError("robbins candidate prime overflows 64 bits");
            }
            if (is_prime(p)) bits.set(m);
        }
    }
}

void mark_even_cototient(const ArithRange& range, u64 limit, AtomicBits& bits) {
    u64 n = range.lo + (range.lo & 1);
    if (n < 2) n = 2;
    for (; n < range.hi; n += 2) {
        const u64 m = n - range.phi_at(n);
        if (m >= 1 && m <= limit) bits.set(m);
    }
}

void mark_odd_cototient(const ArithRange& range, u64 limit, AtomicBits& bits) {
    u64 n = range.lo | 1;
    if (n < 3) n = 3;
    for (; n < range.hi; n += 2) {
        const u64 m = n - range.phi_at(n);
        if (m >= 1 && m <= limit) bits.set(m);
    }
}

void mark_even_aliquot(const ArithRange& range, u64 limit, AtomicBits& bits) {
    u64 n = range.lo + (range.lo & 1);
    if (n < 2) n = 2;
    for (; n < range.hi; n += 2) {
        const u64 m = range.sigma_at(n) - n;
        if (m >= 1 && m <= limit) bits.set(m);
    }
}

void mark_odd_aliquot(const ArithRange& range, u64 limit, AtomicBits& bits) {
    u64 n = range.lo | 1;
    if (n < 3) n = 3;
    for (; n < range.hi; n += 2) {
        const u64 m = range.sigma_at(n) - n;
        if (m >= 1 && m <= limit) bits.set(m);
    }
}

u64 sigma_of_square(const FactoredInteger& f) {
    // sigma(r^2) from the factorization of r.
    u128 result = 1;
    for (const auto& [p, e] : f.factors) {
        u128 pk = 1;
        for (u32 i = 0; i < 2 * e + 1; ++i) pk *= p;
        result *= (pk - 1) / (p - 1);
    }
    if (result > UINT64_MAX) {
        throw CapacityError("sigma(r^2) overflows 64 bits at r=" +
                            std::to_string(f.value));
    }
    return static_cast<u64>(result);
}

// sigma(r^2) - r^2 for odd r <= limit; always even for odd r >= 3.
void mark_odd_squares_aliquot(u64 limit, AtomicBits& bits) {
    if (limit < 3) return;
    const SpfTable table(limit);
    for (u64 r = 3; r <= limit; r += 2) {
        const auto f = factorize(r, &table);
        const u64 r2 = r * r;
        const u64 m = sigma_of_square(f) - r2;
        if (m >= 1 && m <= limit) bits.set(m);
    }
}

std::vector<u64> collect_unset_odd(const std::vector<u64>& words, u64 limit) {
    std::vector<u64> out;
    for (u64 v = 1; v <= limit; v += 2) {
        if ((words[(v - 1) >> 6] >> ((v - 1) & 63) & 1) == 0) out.push_back(v);
    }
    return out;
}

}  // namespace

const char* to_string(MapKind kind) {
    switch (kind) {
        case MapKind::cototient: return "cototient";
        case MapKind::aliquot: return "aliquot";
        case MapKind::robbins: return "robbins";
    }
    return "?";
}

const char* to_string(ImageMode mode) {
    switch (mode) {
        case ImageMode::exact: return "exact";
        case ImageMode::even_only: return "even-only";
        case ImageMode::heuristic: return "heuristic";
    }
    return "?";
}

const char* to_string(CertifyStatus status) {
    switch (status) {
        case CertifyStatus::attained: return "attained";
        case CertifyStatus::exceptional: return "exceptional";
        case CertifyStatus::undecidable: return "undecidable";
    }
    return "?";
}

std::optional<MapKind> parse_map_kind(std::string_view s) {
    if (s == "cototient") return MapKind::cototient;
    if (s == "aliquot") return MapKind::aliquot;
    if (s == "robbins") return MapKind::robbins;
    return std::nullopt;
}

std::optional<ImageMode> parse_image_mode(std::string_view s) {
    if (s == "exact") return ImageMode::exact;
    if (s == "even-only") return ImageMode::even_only;
    if (s == "heuristic") return ImageMode::heuristic;
    return std::nullopt;
}

u64 map_value(MapKind kind, u64 n) {
    switch (kind) {
        case MapKind::cototient:
            if (n < 1) throw DomainError("cototient requires n >= 1");
            return n - euler_phi(n);
        case MapKind::aliquot:
            if (n < 1) throw DomainError("aliquot requires n >= 1");
            return sigma_divisors(n) - n;
        case MapKind::robbins:
            if (n < 3 || (n & 1) == 0 || !is_prime(n)) {
                throw DomainError("robbins map requires an odd prime");
            }
            return (n - 1) / 2 - euler_phi(n - 1);
    }
    throw DomainError("unknown map kind");
}

u64 max_scan_limit(MapKind kind) {
    if (const char* env = std::getenv("EXCEPTION_SIEVE_MAX_SCAN")) {
        char* end = nullptr;
        const unsigned long long v = std::strtoull(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) return v;
    }
    return kind == MapKind::robbins ? kDefaultScanCapRobbins
                                    : kDefaultScanCapCototient;
}

std::optional<u64> SearchBound::required_scan() const {
    if (!decidable) return std::nullopt;
    u64 req = 0;
    if (even_preimage_ceiling) req = std::max(req, *even_preimage_ceiling);
    if (odd_preimage_ceiling) req = std::max(req, *odd_preimage_ceiling);
    if (robbins_w_ceiling) req = std::max(req, *robbins_w_ceiling);
    return req;
}

SearchBound search_bound(MapKind kind, u64 m) {
    if (m == 0) throw DomainError("target m = 0 is out of domain");
    SearchBound b;
    switch (kind) {
        case MapKind::cototient:
            if (m == 1) {
                // attained by n = 2 (and every prime)
                b.even_preimage_ceiling = 2;
                b.decidable = true;
            } else if (m % 2 == 0) {
                // even n has phi(n) <= n/2, so n <= 2m; odd parity impossible
                b.even_preimage_ceiling = 2 * m;
                b.decidable = true;
            } else {
                // odd composite n has n - phi(n) >= sqrt(n)
                b.odd_preimage_ceiling = checked_square(m);
                b.odd_shape = OddShape::any_odd_composite;
                b.decidable = true;
            }
            break;
        case MapKind::aliquot:
            if (m == 1) {
                b.even_preimage_ceiling = 2;
                b.decidable = true;
            } else {
                b.even_preimage_ceiling = 2 * m;
                b.odd_preimage_ceiling = checked_square(m);
                b.odd_shape = m % 2 == 0 ? OddShape::odd_square_only
                                         : OddShape::any_odd_composite;
                b.decidable = true;
            }
            break;
        case MapKind::robbins: {
            const TwoAdic s = split2(m);
            if (s.k == 1) {
                // 2^alpha needs an odd prime w with 2^(alpha+1) w + 1 prime:
                // no finite bound.
                b.decidable = false;
            } else {
                b.robbins_w_ceiling = checked_square(s.k);
                b.decidable = true;
            }
            break;
        }
    }
    return b;
}

ImageMap::ImageMap(MapKind kind, u64 limit, ImageMode mode, u64 heuristic_ceiling,
                   std::vector<u64> words, std::vector<u64> undecided)
    : kind_(kind),
      limit_(limit),
      mode_(mode),
      heuristic_ceiling_(heuristic_ceiling),
      words_(std::move(words)),
      undecided_(std::move(undecided)) {
    if (limit_ < 1) throw DomainError("image limit must be >= 1");
    if (words_.size() != (limit_ + 63) / 64) {
        throw PreconditionError("image bitmap length does not match limit");
    }
    if (!std::is_sorted(undecided_.begin(), undecided_.end())) {
        throw PreconditionError("undecided list must be sorted");
    }
}

bool ImageMap::attained(u64 value) const {
    if (value < 1 || value > limit_) throw DomainError("value outside image range");
    const u64 bit = value - 1;
    return (words_[bit >> 6] >> (bit & 63)) & 1;
}

bool ImageMap::is_undecided(u64 value) const {
    return std::binary_search(undecided_.begin(), undecided_.end(), value);
}

std::vector<u64> ImageMap::exceptions() const {
    std::vector<u64> out;
    for (u64 v = 1; v <= limit_; ++v) {
        if (!attained(v) && !is_undecided(v)) out.push_back(v);
    }
    return out;
}

ImageMap ImageMap::restrict_to(u64 new_limit) const {
    if (new_limit < 1 || new_limit > limit_) {
        throw DomainError("restriction limit out of range");
    }
    std::vector<u64> words(words_.begin(), words_.begin() + (new_limit + 63) / 64);
    if (new_limit % 64 != 0) {
        words.back() &= (u64{1} << (new_limit % 64)) - 1;
    }
    std::vector<u64> und;
    for (u64 v : undecided_) {
        if (v <= new_limit) und.push_back(v);
    }
    return ImageMap(kind_, new_limit, mode_, heuristic_ceiling_, std::move(words),
                    std::move(und));
}

ImageMap build_image(MapKind kind, u64 limit, ImageMode mode,
                     const BuildOptions& opt) {
    if (limit < 1) throw DomainError("image limit must be >= 1");
    if (mode == ImageMode::even_only && kind == MapKind::robbins) {
        throw DomainError("even-only mode applies to cototient/aliquot only");
    }
    if (mode == ImageMode::heuristic && opt.heuristic_ceiling == 0) {
        throw PreconditionError("heuristic mode requires a positive ceiling");
    }
    const u64 cap = opt.max_scan.value_or(max_scan_limit(kind));
    AtomicBits bits(limit);
    std::vector<u64> undecided;

    const auto even_scan = [&](auto&& marker) {
        require_scan(2 * limit, cap, "even preimage scan");
        parallel_scan(2, 2 * limit + 1, opt,
                      [&](const ArithRange& r) { marker(r, limit, bits); });
    };

    switch (mode) {
        case ImageMode::exact: {
            if (kind == MapKind::cototient) {
                even_scan(mark_even_cototient);
                const u64 sq = checked_square(limit);
                require_scan(sq, cap, "exact cototient odd scan");
                parallel_scan(3, sq + 1, opt, [&](const ArithRange& r) {
                    mark_odd_cototient(r, limit, bits);
                });
            } else if (kind == MapKind::aliquot) {
                even_scan(mark_even_aliquot);
                mark_odd_squares_aliquot(limit, bits);
                const u64 sq = checked_square(limit);
                require_scan(sq, cap, "exact aliquot odd scan");
                parallel_scan(3, sq + 1, opt, [&](const ArithRange& r) {
                    mark_odd_aliquot(r, limit, bits);
                });
            } else {
                const u64 sq = checked_square(limit);
                require_scan(sq, cap, "exact robbins w-scan");
                parallel_scan(3, sq + 1, opt, [&](const ArithRange& r) {
                    mark_robbins_segment(r, limit, bits);
                });
                // Powers of two are undecidable; marked attained so that
                // exception counts stay valid lower bounds.
                for (u64 v = 1; v <= limit; v *= 2) {
                    bits.set(v);
                    undecided.push_back(v);
                    if (v > limit / 2) break;
                }
            }
            break;
        }
        case ImageMode::even_only: {
            if (kind == MapKind::cototient) {
                even_scan(mark_even_cototient);
            } else {
                even_scan(mark_even_aliquot);
                mark_odd_squares_aliquot(limit, bits);
            }
            // Odd values the even-n scan happened to certify stay attained;
            // the rest cannot be settled without the odd X^2 scan.
            undecided = collect_unset_odd(bits.take(), limit);
            break;
        }
        case ImageMode::heuristic: {
            const u64 ceiling = opt.heuristic_ceiling;
            require_scan(ceiling, cap, "heuristic scan");
            if (kind == MapKind::robbins) {
                parallel_scan(3, ceiling + 1, opt, [&](const ArithRange& r) {
                    mark_robbins_segment(r, limit, bits);
                });
                for (u64 v = 1; v <= limit; v *= 2) {
                    bits.set(v);
                    if (v > limit / 2) break;
                }
            } else if (kind == MapKind::cototient) {
                parallel_scan(2, ceiling + 1, opt, [&](const ArithRange& r) {
                    mark_even_cototient(r, limit, bits);
                    mark_odd_cototient(r, limit, bits);
                });
            } else {
                parallel_scan(2, ceiling + 1, opt, [&](const ArithRange& r) {
                    mark_even_aliquot(r, limit, bits);
                    mark_odd_aliquot(r, limit, bits);
                });
                mark_odd_squares_aliquot(std::min(limit, ceiling), bits);
            }
            // A cleared bit is certified only when the scan dominated the
            // value's certified preimage bound.
            const auto words = bits.take();
            for (u64 v = 1; v <= limit; ++v) {
                const bool set = (words[(v - 1) >> 6] >> ((v - 1) & 63)) & 1;
                if (set && !(kind == MapKind::robbins && split2(v).k == 1)) continue;
                const auto req = search_bound(kind, v).required_scan();
                if (!req || ceiling < *req) undecided.push_back(v);
            }
            break;
        }
    }
    return ImageMap(kind, limit, mode,
                    mode == ImageMode::heuristic ? opt.heuristic_ceiling : 0,
                    bits.take(), std::move(undecided));
}

ExceptionList enumerate_exceptions(MapKind kind, u64 limit, ImageMode mode,
                                   const BuildOptions& opt) {
    const ImageMap image = build_image(kind, limit, mode, opt);
    return {image.exceptions(), image.undecided()};
}

PreimageWitness find_preimages(MapKind kind, u64 m, u64 ceiling,
                               const BuildOptions& opt) {
    if (m == 0) throw DomainError("target m = 0 is out of domain");
    if (ceiling < 1) throw DomainError("ceiling must be >= 1");
    const u64 cap = opt.max_scan.value_or(max_scan_limit(kind));
    require_scan(ceiling, cap, "preimage scan");

    PreimageWitness w{kind, m, {}, ceiling, false};
    const auto primes = primes_up_to(isqrt(ceiling));
    const u64 seglen = std::max<u64>(opt.segment_length, 1024);
    for (u64 s = 1; s <= ceiling; s += seglen) {
        const ArithRange r = sieve_arith_range(s, std::min(s + seglen, ceiling + 1), primes);
        for (u64 n = r.lo; n < r.hi; ++n) {
            switch (kind) {
                case MapKind::cototient:
                    if (n - r.phi_at(n) == m) w.preimages.push_back(n);
                    break;
                case MapKind::aliquot:
                    if (r.sigma_at(n) - n == m) w.preimages.push_back(n);
                    break;
                case MapKind::robbins:
                    if (n >= 3 && (n & 1) && r.spf_at(n) == n &&
                        (n - 1) / 2 - euler_phi(n - 1) == m) {
                        w.preimages.push_back(n);
                    }
                    break;
            }
        }
    }

    const SearchBound sb = search_bound(kind, m);
    if (!sb.decidable || m == 1) {
        w.exhaustive = false;  // preimages are unbounded (primes)
    } else if (kind == MapKind::robbins) {
        w.exhaustive = ceiling >= robbins_prime_ceiling(m);
    } else {
        w.exhaustive = ceiling >= *sb.required_scan();
    }
    return w;
}

namespace {

// Scans [lo, hi] sequentially, returning the first n accepted by pred.
template <typename Pred>
std::optional<u64> first_matching(u64 lo, u64 hi, u64 seglen, Pred&& pred) {
    if (lo > hi) return std::nullopt;
    const auto primes = primes_up_to(isqrt(hi));
    for (u64 s = lo; s <= hi; s += seglen) {
        const ArithRange r = sieve_arith_range(s, std::min(s + seglen, hi + 1), primes);
        for (u64 n = r.lo; n < r.hi; ++n) {
            if (pred(r, n)) return n;
        }
    }
    return std::nullopt;
}

}  // namespace

CertifyResult certify(MapKind kind, u64 m, const BuildOptions& opt) {
    if (m == 0) throw DomainError("target m = 0 is out of domain");
    const u64 cap = opt.max_scan.value_or(max_scan_limit(kind));
    const u64 seglen = std::max<u64>(opt.segment_length, 1024);

    if (kind == MapKind::cototient || kind == MapKind::aliquot) {
        if (m == 1) return {CertifyStatus::attained, 2};
        const bool even_applies = kind == MapKind::aliquot || m % 2 == 0;
        if (even_applies) {
            require_scan(2 * m, cap, "certify even scan");
            auto hit = first_matching(2, 2 * m, seglen, [&](const ArithRange& r, u64 n) {
                if (n % 2 != 0) return false;
                return kind == MapKind::cototient ? n - r.phi_at(n) == m
                                                  : r.sigma_at(n) - n == m;
            });
            if (hit) return {CertifyStatus::attained, *hit};
        }
        if (kind == MapKind::aliquot && m % 2 == 0) {
            // odd preimages of even targets are odd squares r^2, r <= m
            for (u64 r = 3; r <= m; r += 2) {
                const auto f = factorize(r);
                if (sigma_of_square(f) - r * r == m) {
                    return {CertifyStatus::attained, r * r};
                }
            }
            return {CertifyStatus::exceptional, std::nullopt};
        }
        if (m % 2 == 1) {
            const u64 sq = checked_square(m);
            require_scan(sq, cap, "certify odd scan");
            auto hit = first_matching(3, sq, seglen, [&](const ArithRange& r, u64 n) {
                if (n % 2 == 0) return false;
                return kind == MapKind::cototient ? n - r.phi_at(n) == m
                                                  : r.sigma_at(n) - n == m;
            });
            if (hit) return {CertifyStatus::attained, *hit};
        }
        return {CertifyStatus::exceptional, std::nullopt};
    }

    // robbins
    const TwoAdic s = split2(m);
    if (s.k == 1) return {CertifyStatus::undecidable, std::nullopt};
    const u64 wcap = checked_square(s.k);
    require_scan(wcap, cap, "certify robbins w-scan");
    auto hit = first_matching(3, wcap, seglen, [&](const ArithRange& r, u64 n) {
        if (n % 2 == 0) return false;
        if (n - r.phi_at(n) != s.k) return false;
        const u64 p = (n << (s.alpha + 1)) + 1;
        if (p >> (s.alpha + 1) != n) {
            throw CapacityError("robbins candidate prime overflows 64 bits");
        }
        return is_prime(p);
    });
    if (hit) return {CertifyStatus::attained, (*hit << (s.alpha + 1)) + 1};
    return {CertifyStatus::exceptional, std::nullopt};
}

}  // namespace exsieve
