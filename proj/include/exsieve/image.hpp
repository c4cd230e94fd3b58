#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "exsieve/arith.hpp"

namespace exsieve {

enum class MapKind : std::uint8_t { cototient = 0, aliquot = 1, robbins = 2 };
enum class ImageMode : std::uint8_t { exact = 0, even_only = 1, heuristic = 2 };

const char* to_string(MapKind kind);
const char* to_string(ImageMode mode);
std::optional<MapKind> parse_map_kind(std::string_view s);
std::optional<ImageMode> parse_image_mode(std::string_view s);

// f_c(n) = n - phi(n); f_a(n) = sigma(n) - n; f_r(p) = (p-1)/2 - phi(p-1)
// (robbins requires an odd prime argument).
u64 map_value(MapKind kind, u64 n);

enum class OddShape : std::uint8_t { any_odd_composite, odd_square_only, none };

// Certified preimage search bounds, per target value.  Ceilings bound the
// scan variable: n for cototient/aliquot, the odd part w of p-1 for robbins.
struct SearchBound {
    std::optional<u64> even_preimage_ceiling;
    std::optional<u64> odd_preimage_ceiling;
    OddShape odd_shape = OddShape::none;
    std::optional<u64> robbins_w_ceiling;
    bool decidable = false;

    // Largest scan ceiling needed to settle the target exhaustively;
    // nullopt when the search is unbounded (robbins powers of two, m = 1).
    std::optional<u64> required_scan() const;
};

SearchBound search_bound(MapKind kind, u64 m);

struct BuildOptions {
    unsigned workers = 0;  // 0 = hardware concurrency
    u64 segment_length = kDefaultSegmentLength;
    u64 heuristic_ceiling = 0;  // required when mode == heuristic
    std::optional<u64> max_scan;  // overrides the per-kind default / env var
};

// Default odd/w-scan ceiling; EXCEPTION_SIEVE_MAX_SCAN overrides both.
// Defaults keep exact cototient/aliquot at X <= 3*10^4 (scan 9*10^8)
// and exact robbins at X <= 10^4 (w-scan 10^8).
u64 max_scan_limit(MapKind kind);

// Bitmap over 1..limit marking which targets are attained, plus the list
// of values whose status the mode's finite search cannot settle.
class ImageMap {
public:
    ImageMap(MapKind kind, u64 limit, ImageMode mode, u64 heuristic_ceiling,
             std::vector<u64> words, std::vector<u64> undecided);

    MapKind kind() const { return kind_; }
    u64 limit() const { return limit_; }
    ImageMode mode() const { return mode_; }
    u64 heuristic_ceiling() const { return heuristic_ceiling_; }
    const std::vector<u64>& words() const { return words_; }
    const std::vector<u64>& undecided() const { return undecided_; }

    bool attained(u64 value) const;
    bool is_undecided(u64 value) const;

    // Values neither attained nor undecided: the certified exceptions.
    std::vector<u64> exceptions() const;

    ImageMap restrict_to(u64 new_limit) const;

    bool operator==(const ImageMap&) const = default;

private:
    MapKind kind_;
    u64 limit_;
    ImageMode mode_;
    u64 heuristic_ceiling_;
    std::vector<u64> words_;
    std::vector<u64> undecided_;
};

ImageMap build_image(MapKind kind, u64 limit, ImageMode mode,
                     const BuildOptions& options = {});

struct ExceptionList {
    std::vector<u64> exceptions;
    std::vector<u64> undecided;
};

ExceptionList enumerate_exceptions(MapKind kind, u64 limit, ImageMode mode,
                                   const BuildOptions& options = {});

struct PreimageWitness {
    MapKind kind;
    u64 target;
    std::vector<u64> preimages;  // for robbins: odd primes p
    u64 ceiling_used;
    bool exhaustive;
};

PreimageWitness find_preimages(MapKind kind, u64 m, u64 ceiling,
                               const BuildOptions& options = {});

enum class CertifyStatus : std::uint8_t { attained, exceptional, undecidable };

const char* to_string(CertifyStatus status);

struct CertifyResult {
    CertifyStatus status;
    std::optional<u64> witness;
};

CertifyResult certify(MapKind kind, u64 m, const BuildOptions& options = {});

}  // namespace exsieve
