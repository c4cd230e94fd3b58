#include "exsieve/verify.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>

namespace exsieve {

namespace {

// #{k <= limit : k == r (mod 6)} for 1 <= r <= 5
u64 count_mod6(u64 limit, u64 r) {
    if (limit < r) return 0;
    return (limit - r) / 6 + 1;
}

u64 checked_square(u64 x) {
    const u128 sq = static_cast<u128>(x) * x;
    if (sq > UINT64_MAX) {
        throw CapacityError("scan bound overflows 64 bits for X=" + std::to_string(x));
    }
    return static_cast<u64>(sq);
}

bool is_squarefree(const FactoredInteger& f) {
    for (const auto& pp : f.factors) {
        if (pp.exponent > 1) return false;
    }
    return true;
}

}  // namespace

const char* to_string(StructuredSet set) {
    switch (set) {
        case StructuredSet::K: return "K";
        case StructuredSet::M1: return "M1";
        case StructuredSet::M2: return "M2";
        case StructuredSet::M: return "M";
    }
    return "?";
}

std::optional<StructuredSet> parse_structured_set(std::string_view s) {
    if (s == "K") return StructuredSet::K;
    if (s == "M1") return StructuredSet::M1;
    if (s == "M2") return StructuredSet::M2;
    if (s == "M") return StructuredSet::M;
    return std::nullopt;
}

TwoAdicSplit two_adic_split(u64 m) {
    if (m == 0) throw DomainError("two-adic split requires m >= 1");
    const u32 alpha = static_cast<u32>(std::countr_zero(m));
    return {alpha, m >> alpha};
}

bool set_membership(StructuredSet set, u64 m) {
    if (m == 0) throw DomainError("set membership requires m >= 1");
    if (set == StructuredSet::K) return m % 12 == 0;
    const TwoAdicSplit s = two_adic_split(m);
    switch (set) {
        case StructuredSet::M1: return s.k % 6 == 3 && s.alpha % 2 == 0;
        case StructuredSet::M2: return s.k % 6 == 5 && s.alpha % 2 == 1;
        case StructuredSet::M:
            return (s.k % 6 == 3 && s.alpha % 2 == 0) ||
                   (s.k % 6 == 5 && s.alpha % 2 == 1);
        default: return false;
    }
}

SetCount set_count(StructuredSet set, u64 X) {
    if (X < 1) throw DomainError("set_count requires X >= 1");
    u64 count = 0;
    double asymptotic = 0;
    switch (set) {
        case StructuredSet::K:
            count = X / 12;
            asymptotic = 1.0 / 12.0;
            break;
        case StructuredSet::M1:
            for (u64 pow = 1; pow <= X; pow *= 4) {
                count += count_mod6(X / pow, 3);
                if (pow > X / 4) break;
            }
            asymptotic = 2.0 / 9.0;
            break;
        case StructuredSet::M2:
            for (u64 pow = 2; pow <= X; pow *= 4) {
                count += count_mod6(X / pow, 5);
                if (pow > X / 4) break;
            }
            asymptotic = 1.0 / 9.0;
            break;
        case StructuredSet::M:
            count = set_count(StructuredSet::M1, X).count +
                    set_count(StructuredSet::M2, X).count;
            asymptotic = 1.0 / 3.0;
            break;
    }
    return {count, static_cast<double>(count) / static_cast<double>(X), asymptotic};
}

RobbinsDecomposition decompose_robbins(u64 p) {
    if (p < 3 || p % 2 == 0 || !is_prime(p)) {
        throw DomainError("decompose_robbins requires an odd prime, got " +
                          std::to_string(p));
    }
    RobbinsDecomposition d{};
    d.p = p;
    d.beta = static_cast<u32>(std::countr_zero(p - 1));
    d.w = (p - 1) >> d.beta;
    d.m = (p - 1) / 2 - euler_phi(p - 1);
    d.split_valid = d.m > 0;
    if (d.split_valid) {
        const TwoAdicSplit s = two_adic_split(d.m);
        d.alpha = s.alpha;
        d.k = s.k;
    }
    return d;
}

StructureScanReport robbins_structure_scan(u64 X, const BuildOptions& opt) {
    if (X < 1) throw DomainError("robbins_structure_scan requires X >= 1");
    const u64 cap = opt.max_scan.value_or(max_scan_limit(MapKind::robbins));
    const u64 wmax = checked_square(X);
    if (wmax > cap) {
        throw CapacityError("structure scan needs w up to " + std::to_string(wmax) +
                            " but the ceiling is " + std::to_string(cap));
    }

    StructureScanReport report{};
    report.X = X;
    const auto primes = primes_up_to(isqrt(wmax));
    const u64 seglen = std::max<u64>(opt.segment_length, 1024);
    for (u64 s = 3; s <= wmax; s += seglen) {
        const ArithRange r = sieve_arith_range(s, std::min(s + seglen, wmax + 1), primes);
        for (u64 w = r.lo | 1; w < r.hi; w += 2) {
            const u64 k = w - r.phi_at(w);
            if (k < 3 || k > X) continue;
            for (u32 alpha = 0;; ++alpha) {
                const u64 m = k << alpha;
                if (m > X || (m >> alpha) != k) break;
                if (!set_membership(StructuredSet::M, m)) continue;
                const u64 p = (w << (alpha + 1)) + 1;
                if (p >> (alpha + 1) != w) {
                    throw CapacityError("candidate prime overflows 64 bits");
                }
                if (!is_prime(p)) continue;
                ++report.scanned;

                const RobbinsDecomposition d = decompose_robbins(p);
                if (!d.split_valid || d.beta != alpha + 1 || d.k != k || d.m != m) {
                    report.decomposition_violations.push_back(p);
                    continue;
                }
                const auto fw = factorize(w);
                if (!is_squarefree(fw)) {
                    report.square_exceptions.push_back(p);
                    continue;
                }
                if (w % 3 != 0) {
                    report.three_violations.push_back(p);
                    continue;
                }
                if (3 * k < w) report.k_bound_violations.push_back(p);
                if (p > 7 * X) report.prime_bound_violations.push_back(p);
            }
        }
    }
    return report;
}

TrendReport theorem_report(int id, u64 X, const BuildOptions& opt) {
    if (X < 1) throw DomainError("theorem_report requires X >= 1");
    TrendReport report{};
    report.theorem = id;
    report.X = X;

    switch (id) {
        case 1: {
            const ImageMap image =
                build_image(MapKind::cototient, X, ImageMode::even_only, opt);
            const auto primes = primes_up_to(X / 2);
            u64 total = 0, noncototient = 0;
            double harmonic = 0;
            for (u64 p : primes) {
                if (p == 2) continue;
                ++total;
                if (!image.attained(2 * p)) {
                    ++noncototient;
                    harmonic += 1.0 / static_cast<double>(2 * p);
                }
            }
            report.counts = {{"odd_primes", total}, {"noncototient_2p", noncototient}};
            report.headline_count = noncototient;
            report.headline_density =
                total == 0 ? 0.0
                           : static_cast<double>(noncototient) / static_cast<double>(total);
            report.bound_value =
                static_cast<double>(X) / (2.0 * std::log(static_cast<double>(X)));
            report.diagnostics = {{"harmonic_sum_2p", harmonic}};
            report.pass = static_cast<double>(noncototient) >= report.bound_value;
            break;
        }
        case 2: {
            const ImageMap image =
                build_image(MapKind::aliquot, X, ImageMode::even_only, opt);
            const u64 k_count = X / 12;
            u64 inter = 0;
            for (u64 k = 12; k <= X; k += 12) {
                if (!image.attained(k)) ++inter;
            }
            const u64 diff = k_count - inter;
            report.counts = {{"K", k_count}, {"K_and_Na", inter}, {"K_minus_Na", diff}};
            report.headline_count = inter;
            report.headline_density =
                static_cast<double>(inter) / static_cast<double>(X);
            report.bound_value = static_cast<double>(X) / 48.0;
            report.diagnostics = {
                {"K_minus_Na_ceiling", static_cast<double>(X) / 16.0}};
            report.pass = static_cast<double>(inter) >= report.bound_value;
            break;
        }
        case 3: {
            const ImageMap image =
                build_image(MapKind::robbins, X, ImageMode::exact, opt);
            const auto exceptions = image.exceptions();
            u64 in_m = 0;
            for (u64 v : exceptions) {
                if (set_membership(StructuredSet::M, v)) ++in_m;
            }
            report.counts = {{"M", set_count(StructuredSet::M, X).count},
                             {"M_and_Nr", in_m},
                             {"Nr", exceptions.size()},
                             {"undecided", image.undecided().size()}};
            report.headline_count = exceptions.size();
            report.headline_density =
                static_cast<double>(exceptions.size()) / static_cast<double>(X);
            report.bound_value = static_cast<double>(X) / 3.0;
            report.pass = static_cast<double>(exceptions.size()) >= report.bound_value;
            break;
        }
        default:
            throw DomainError("theorem id must be 1, 2 or 3");
    }
    return report;
}

Ratio h_y(u64 n, double y) {
    if (n < 3) throw DomainError("h_y requires n >= 3");
    const u64 v = 2 * n - euler_phi(n);
    u64 num = 0, den = 1;
    for (const auto& [p, e] : factorize(v).factors) {
        if (static_cast<double>(p) <= y) continue;
        // den is a product of distinct primes dividing v, so den <= v
        num = num * p + den;
        den *= p;
    }
    if (num == 0) return {0, 1};
    const u64 g = std::gcd(num, den);
    return {num / g, den / g};
}

bool in_A(u64 n) {
    if (n < 3) throw DomainError("in_A requires n >= 3");
    return std::gcd(n, euler_phi(n)) == 1;
}

bool in_A_xy(u64 n, double y) {
    if (!in_A(n)) return false;
    const Ratio h = h_y(n, y);
    return h.num > h.den;
}

double iterated_log(double x, int k) {
    if (k < 1) throw DomainError("iterated_log requires k >= 1");
    double v = x;
    for (int i = 0; i < k; ++i) v = std::max(std::log(v), 1.0);
    return v;
}

bool in_B(u64 n, double c1) {
    if (n < 3) throw DomainError("in_B requires n >= 3");
    if (c1 <= 0) throw DomainError("in_B requires c1 > 0");
    const double x = static_cast<double>(n);
    const double threshold = c1 * iterated_log(x, 2) / iterated_log(x, 3);
    if (threshold < 2) return false;
    const u64 phi = euler_phi(n);
    for (u64 p : primes_up_to(static_cast<u64>(threshold))) {
        if (phi % p != 0) return true;
    }
    return false;
}

u64 rough_count(u64 x, u64 y) {
    if (x < 1 || y < 2) throw DomainError("rough_count requires x >= 1, y >= 2");
    if (x > kSmoothCountCap) {
        throw CapacityError("rough_count x exceeds cap " +
                            std::to_string(kSmoothCountCap));
    }
    std::vector<bool> blocked(x + 1, false);
    for (u64 p : primes_up_to(std::min(x, y))) {
        for (u64 j = p; j <= x; j += p) blocked[j] = true;
    }
    u64 count = 0;
    for (u64 n = 1; n <= x; ++n) {
        if (!blocked[n]) ++count;
    }
    return count;
}

Ratio sigma_mod12_density(u64 X) {
    if (X < 1) throw DomainError("sigma_mod12_density requires X >= 1");
    const auto primes = primes_up_to(isqrt(X));
    u64 count = 0;
    const u64 seglen = kDefaultSegmentLength;
    for (u64 s = 1; s <= X; s += seglen) {
        const ArithRange r = sieve_arith_range(s, std::min(s + seglen, X + 1), primes);
        for (u64 n = r.lo; n < r.hi; ++n) {
            if (r.sigma_at(n) % 12 == 0) ++count;
        }
    }
    return {count, X};
}

PrimeFlags classify_prime(u64 p, const BuildOptions& opt) {
    if (p < 3 || p % 2 == 0 || !is_prime(p)) {
        throw DomainError("classify_prime requires an odd prime");
    }
    PrimeFlags flags{};
    flags.is_mersenne = (p & (p + 1)) == 0;  // p + 1 is a power of two
    try {
        flags.two_p_noncototient =
            certify(MapKind::cototient, 2 * p, opt).status == CertifyStatus::exceptional;
    } catch (const CapacityError&) {
        flags.two_p_noncototient = std::nullopt;
    }
    return flags;
}

}  // namespace exsieve
