#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "exsieve/image.hpp"

namespace exsieve {

// K  = {m : m == 0 (mod 12)}
// M1 = {2^a k : k == 3 (mod 6), a even},  M2 = {2^a k : k == 5 (mod 6), a odd}
// M  = M1 u M2 (disjoint)
enum class StructuredSet : std::uint8_t { K, M1, M2, M };

const char* to_string(StructuredSet set);
std::optional<StructuredSet> parse_structured_set(std::string_view s);

struct TwoAdicSplit {
    u32 alpha;
    u64 k;  // odd
};

TwoAdicSplit two_adic_split(u64 m);

bool set_membership(StructuredSet set, u64 m);

struct SetCount {
    u64 count;
    double density;        // count / X
    double asymptotic_density;  // 1/12, 2/9, 1/9 or 1/3
};

SetCount set_count(StructuredSet set, u64 X);

// p - 1 = 2^beta w with w odd; m = f_r(p) = 2^(beta-1) (w - phi(w)).
// When m > 0, m = 2^alpha k forces beta = alpha + 1 and k = w - phi(w).
struct RobbinsDecomposition {
    u64 p;
    u32 beta;
    u64 w;
    u64 m;
    bool split_valid;  // false iff m == 0
    u32 alpha;
    u64 k;
};

RobbinsDecomposition decompose_robbins(u64 p);

struct StructureScanReport {
    u64 X;
    u64 scanned;  // (p, m) pairs found with f_r(p) in M(X)
    std::vector<u64> decomposition_violations;  // p breaking beta=alpha+1, k=w-phi(w)
    std::vector<u64> square_exceptions;         // p with q^2 | w
    std::vector<u64> three_violations;          // p with squarefree w, 3 not | w
    std::vector<u64> k_bound_violations;        // p with 3 | w but k < w/3
    std::vector<u64> prime_bound_violations;    // conforming p > 7X
};

StructureScanReport robbins_structure_scan(u64 X, const BuildOptions& options = {});

struct TrendReport {
    int theorem;
    u64 X;
    std::vector<std::pair<std::string, u64>> counts;
    std::vector<std::pair<std::string, double>> diagnostics;
    u64 headline_count;
    double headline_density;
    double bound_value;
    bool pass;
};

TrendReport theorem_report(int id, u64 X, const BuildOptions& options = {});

// Exact reduced ratio; zero is {0, 1}.
struct Ratio {
    u64 num;
    u64 den;

    bool operator==(const Ratio&) const = default;
};

// sum of 1/p over primes p > y dividing 2n - phi(n)
Ratio h_y(u64 n, double y);

bool in_A(u64 n);                 // gcd(n, phi(n)) == 1
bool in_A_xy(u64 n, double y);    // in_A(n) and h_y(n) > 1
bool in_B(u64 n, double c1);      // p not | phi(n) for some p <= c1 log_2(n)/log_3(n)

// #{n <= x : p not | n for all p <= y}
u64 rough_count(u64 x, u64 y);

// exact fraction of n <= X with 12 | sigma(n), as count / X
Ratio sigma_mod12_density(u64 X);

// log_k with the max{log, 1} clamp applied at every level.
double iterated_log(double x, int k);

struct PrimeFlags {
    bool is_mersenne;
    std::optional<bool> two_p_noncototient;  // nullopt if certification exceeded capacity
    std::string riesel = "unknown";          // unbounded search, never attempted
};

PrimeFlags classify_prime(u64 p, const BuildOptions& options = {});

}  // namespace exsieve
