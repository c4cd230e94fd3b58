// exsieve — enumeration and verification CLI for the exceptional values of
// n - phi(n), sigma(n) - n, and (p-1)/2 - phi(p-1).

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "exsieve/arith.hpp"
#include "exsieve/cache.hpp"
#include "exsieve/image.hpp"
#include "exsieve/verify.hpp"

namespace {

using json = nlohmann::ordered_json;
using namespace exsieve;

constexpr const char* kToolVersion = "1.0.0";

// decimal with 12 significant digits (exceptions CSV and reports)
std::string fmt12(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

double round12(double v) { return std::stod(fmt12(v)); }

struct OutputSink {
    std::string format = "json";  // json | csv
    std::string out_path;         // empty = stdout

    void write(const std::string& text) const {
        if (out_path.empty()) {
            std::cout << text;
            if (!text.empty() && text.back() != '\n') std::cout << '\n';
        } else {
            std::ofstream file(out_path, std::ios::trunc);
            if (!file) throw std::runtime_error("cannot open output file: " + out_path);
            file << text;
            if (!text.empty() && text.back() != '\n') file << '\n';
        }
    }
};

struct Manifest {
    std::string subcommand;
    json parameters = json::object();
    unsigned workers = 0;
    json phases = json::object();
    json input_caches = json::array();
    json outputs = json::array();
    std::string path;  // empty = not requested

    void add_phase(const std::string& name, double seconds) {
        phases[name] = round12(seconds);
    }

    void write() const {
        if (path.empty()) return;
        json m;
        m["tool"] = "exsieve";
        m["version"] = kToolVersion;
        m["subcommand"] = subcommand;
        m["parameters"] = parameters;
        m["capacity"] = {
            {"cototient_aliquot_max_scan", max_scan_limit(MapKind::cototient)},
            {"robbins_max_scan", max_scan_limit(MapKind::robbins)},
        };
        m["workers"] = workers;
        m["wall_seconds"] = phases;
        m["input_caches"] = input_caches;
        m["outputs"] = outputs;
        const auto now = std::chrono::system_clock::now().time_since_epoch();
        m["timestamp_unix"] =
            std::chrono::duration_cast<std::chrono::seconds>(now).count();
        std::ofstream file(path, std::ios::trunc);
        if (!file) throw std::runtime_error("cannot open manifest file: " + path);
        file << m.dump(2) << '\n';
    }
};

class Timer {
public:
    double elapsed() const {
        return std::chrono::duration<double>(Clock::now() - start_).count();
    }

private:
    using Clock = std::chrono::steady_clock;
    Clock::time_point start_ = Clock::now();
};

json exception_list_json(MapKind kind, const ImageMap& image) {
    json j;
    j["kind"] = to_string(kind);
    j["limit"] = image.limit();
    j["mode"] = to_string(image.mode());
    if (image.mode() == ImageMode::heuristic) j["ceiling"] = image.heuristic_ceiling();
    j["exceptions"] = image.exceptions();
    j["undecided"] = image.undecided();
    return j;
}

std::string exceptions_csv(const ImageMap& image) {
    std::ostringstream out;
    out << "value\n";
    for (u64 v : image.exceptions()) out << v << '\n';
    return out.str();
}

json trend_json(const TrendReport& r) {
    json j;
    j["theorem"] = r.theorem;
    j["X"] = r.X;
    json counts = json::object();
    for (const auto& [name, value] : r.counts) counts[name] = value;
    j["counts"] = counts;
    j["bound_value"] = round12(r.bound_value);
    j["count"] = r.headline_count;
    j["density"] = round12(r.headline_density);
    json diag = json::object();
    for (const auto& [name, value] : r.diagnostics) diag[name] = round12(value);
    j["diagnostics"] = diag;
    j["pass"] = r.pass;
    return j;
}

std::string trend_csv(const TrendReport& r) {
    std::ostringstream out;
    out << "theorem,X,count,bound,density,pass\n";
    out << r.theorem << ',' << r.X << ',' << r.headline_count << ','
        << fmt12(r.bound_value) << ',' << fmt12(r.headline_density) << ','
        << (r.pass ? "true" : "false") << '\n';
    return out.str();
}

ImageMap load_or_build(MapKind kind, u64 limit, ImageMode mode,
                       const BuildOptions& opt, const std::string& cache_path,
                       Manifest& manifest) {
    if (!cache_path.empty() && std::filesystem::exists(cache_path)) {
        ImageMap cached = read_cache(cache_path);
        if (cached.kind() != kind || cached.limit() != limit || cached.mode() != mode ||
            (mode == ImageMode::heuristic &&
             cached.heuristic_ceiling() != opt.heuristic_ceiling)) {
            throw CacheError("cache " + cache_path +
                             " does not match the requested image parameters");
        }
        std::vector<char> raw;
        std::ifstream f(cache_path, std::ios::binary | std::ios::ate);
        raw.resize(static_cast<size_t>(f.tellg()));
        f.seekg(0);
        f.read(raw.data(), static_cast<std::streamsize>(raw.size()));
        manifest.input_caches.push_back(
            {{"path", cache_path},
             {"checksum", fnv1a64(std::as_bytes(std::span(raw)))}});
        std::cerr << "[exsieve] loaded image from cache " << cache_path << '\n';
        return cached;
    }
    Timer t;
    ImageMap image = build_image(kind, limit, mode, opt);
    manifest.add_phase("build_image", t.elapsed());
    std::cerr << "[exsieve] built " << to_string(kind) << " image (X=" << limit
              << ", " << to_string(mode) << ") in " << fmt12(t.elapsed()) << "s\n";
    if (!cache_path.empty()) {
        const u64 checksum = write_cache(image, cache_path);
        manifest.outputs.push_back({{"path", cache_path}, {"checksum", checksum}});
    }
    return image;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"certified enumeration of noncototients, nonaliquots and Robbins numbers"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kToolVersion);

    std::string kind_str = "cototient", mode_str = "exact", set_str = "K";
    std::string format = "json", out_path, cache_path, manifest_path;
    u64 limit = 0, value = 0, ceiling = 0, y_arg = 2;
    unsigned workers = 0;
    int theorem_id = 0, lemma_id = 0;
    double c1 = 1.0;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--format", format, "output format: json|csv")
            ->check(CLI::IsMember({"json", "csv"}));
        cmd->add_option("--out", out_path, "write data output to this file");
        cmd->add_option("--manifest", manifest_path, "write a run manifest (JSON)");
        cmd->add_option("--workers", workers, "worker threads (default: all cores)");
    };

    auto* cmd_image = app.add_subcommand("image", "build an attainment image");
    cmd_image->add_option("--kind", kind_str)->required();
    cmd_image->add_option("--limit", limit)->required();
    cmd_image->add_option("--mode", mode_str);
    cmd_image->add_option("--ceiling", ceiling, "heuristic scan ceiling");
    cmd_image->add_option("--cache", cache_path, "binary cache path to write/reuse");
    add_common(cmd_image);

    auto* cmd_exc = app.add_subcommand("exceptions", "enumerate exceptional values");
    cmd_exc->add_option("--kind", kind_str)->required();
    cmd_exc->add_option("--limit", limit)->required();
    cmd_exc->add_option("--mode", mode_str);
    cmd_exc->add_option("--ceiling", ceiling);
    cmd_exc->add_option("--cache", cache_path);
    add_common(cmd_exc);

    auto* cmd_cert = app.add_subcommand("certify", "certify one target value");
    cmd_cert->add_option("--kind", kind_str)->required();
    cmd_cert->add_option("--value", value)->required();
    add_common(cmd_cert);

    auto* cmd_pre = app.add_subcommand("preimages", "list preimages up to a ceiling");
    cmd_pre->add_option("--kind", kind_str)->required();
    cmd_pre->add_option("--value", value)->required();
    cmd_pre->add_option("--ceiling", ceiling)->required();
    add_common(cmd_pre);

    auto* cmd_verify = app.add_subcommand("verify", "theorem verification report");
    cmd_verify->add_option("--theorem", theorem_id)->required()->check(CLI::Range(1, 3));
    cmd_verify->add_option("--limit", limit)->required();
    add_common(cmd_verify);

    auto* cmd_diag = app.add_subcommand("diagnostics", "lemma-level diagnostics");
    cmd_diag->add_option("--lemma", lemma_id)->required()->check(CLI::Range(1, 4));
    cmd_diag->add_option("--limit", limit)->required();
    cmd_diag->add_option("--y", y_arg, "smoothness/roughness parameter y");
    cmd_diag->add_option("--c1", c1, "constant c1 for the small-prime divisibility test");
    add_common(cmd_diag);

    auto* cmd_sets = app.add_subcommand("sets", "structured set counts");
    cmd_sets->add_option("--set", set_str)->required()
        ->check(CLI::IsMember({"K", "M1", "M2", "M"}));
    cmd_sets->add_option("--limit", limit)->required();
    add_common(cmd_sets);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return e.get_exit_code() == 0 ? 0 : 2;
    }

    Manifest manifest;
    manifest.path = manifest_path;
    manifest.workers = workers;
    for (int i = 1; i < argc; ++i) manifest.parameters["argv"].push_back(argv[i]);

    OutputSink sink{format, out_path};
    int exit_code = 0;
    Timer total;

    try {
        BuildOptions opt;
        opt.workers = workers;
        opt.heuristic_ceiling = ceiling;

        const auto parse_kind = [&]() {
            auto k = parse_map_kind(kind_str);
            if (!k) throw DomainError("unknown kind: " + kind_str);
            return *k;
        };
        const auto parse_mode = [&]() {
            auto m = parse_image_mode(mode_str);
            if (!m) throw DomainError("unknown mode: " + mode_str);
            return *m;
        };

        if (cmd_image->parsed()) {
            manifest.subcommand = "image";
            const MapKind kind = parse_kind();
            const ImageMode mode = parse_mode();
            const ImageMap image =
                load_or_build(kind, limit, mode, opt, cache_path, manifest);
            u64 attained = 0;
            for (u64 v = 1; v <= image.limit(); ++v) attained += image.attained(v);
            json j = {{"kind", to_string(kind)},
                      {"limit", image.limit()},
                      {"mode", to_string(mode)},
                      {"attained", attained},
                      {"exceptions", image.exceptions().size()},
                      {"undecided", image.undecided().size()}};
            if (format == "csv") {
                std::ostringstream out;
                out << "kind,limit,mode,attained,exceptions,undecided\n"
                    << to_string(kind) << ',' << image.limit() << ',' << to_string(mode)
                    << ',' << attained << ',' << image.exceptions().size() << ','
                    << image.undecided().size() << '\n';
                sink.write(out.str());
            } else {
                sink.write(j.dump(2));
            }
        } else if (cmd_exc->parsed()) {
            manifest.subcommand = "exceptions";
            const MapKind kind = parse_kind();
            const ImageMode mode = parse_mode();
            const ImageMap image =
                load_or_build(kind, limit, mode, opt, cache_path, manifest);
            if (format == "csv") {
                sink.write(exceptions_csv(image));
            } else {
                sink.write(exception_list_json(kind, image).dump(2));
            }
        } else if (cmd_cert->parsed()) {
            manifest.subcommand = "certify";
            const MapKind kind = parse_kind();
            const CertifyResult result = certify(kind, value, opt);
            if (format == "csv") {
                std::ostringstream out;
                out << "kind,value,status,witness\n"
                    << to_string(kind) << ',' << value << ',' << to_string(result.status)
                    << ',' << (result.witness ? std::to_string(*result.witness) : "")
                    << '\n';
                sink.write(out.str());
            } else if (!out_path.empty()) {
                json j = {{"kind", to_string(kind)},
                          {"value", value},
                          {"status", to_string(result.status)}};
                if (result.witness) j["witness"] = *result.witness;
                sink.write(j.dump(2));
            } else {
                // plain status on stdout, witness appended when present
                std::string line = to_string(result.status);
                if (result.witness) line += " " + std::to_string(*result.witness);
                sink.write(line);
            }
        } else if (cmd_pre->parsed()) {
            manifest.subcommand = "preimages";
            const MapKind kind = parse_kind();
            const PreimageWitness w = find_preimages(kind, value, ceiling, opt);
            if (format == "csv") {
                std::ostringstream out;
                out << "value\n";
                for (u64 n : w.preimages) out << n << '\n';
                sink.write(out.str());
            } else {
                json j = {{"kind", to_string(kind)},
                          {"target", w.target},
                          {"preimages", w.preimages},
                          {"ceiling_used", w.ceiling_used},
                          {"exhaustive", w.exhaustive}};
                sink.write(j.dump(2));
            }
        } else if (cmd_verify->parsed()) {
            manifest.subcommand = "verify";
            Timer t;
            const TrendReport report = theorem_report(theorem_id, limit, opt);
            manifest.add_phase("theorem_report", t.elapsed());
            sink.write(format == "csv" ? trend_csv(report) : trend_json(report).dump(2));
            // failures below X = 10^3 are reported but not fatal
            if (!report.pass && limit >= 1000) exit_code = 1;
        } else if (cmd_diag->parsed()) {
            manifest.subcommand = "diagnostics";
            json j;
            j["lemma"] = lemma_id;
            switch (lemma_id) {
                case 1:
                    j["x"] = limit;
                    j["y"] = y_arg;
                    j["psi"] = smooth_count(limit, y_arg);
                    break;
                case 2: {
                    u64 in_a = 0, in_axy = 0;
                    for (u64 n = 3; n <= limit; ++n) {
                        if (!in_A(n)) continue;
                        ++in_a;
                        if (in_A_xy(n, static_cast<double>(y_arg))) ++in_axy;
                    }
                    j["x"] = limit;
                    j["y"] = y_arg;
                    j["A_count"] = in_a;
                    j["A_xy_count"] = in_axy;
                    break;
                }
                case 3: {
                    u64 in_b = 0;
                    for (u64 n = 3; n <= limit; ++n) in_b += in_B(n, c1);
                    j["x"] = limit;
                    j["c1"] = round12(c1);
                    j["B_count"] = in_b;
                    break;
                }
                case 4:
                    j["x"] = limit;
                    j["y"] = y_arg;
                    j["rough_count"] = rough_count(limit, y_arg);
                    break;
            }
            if (format == "csv") {
                std::ostringstream out;
                out << "name,value\n";
                for (const auto& [key, val] : j.items()) {
                    out << key << ',' << (val.is_number_float() ? fmt12(val.get<double>())
                                                                : val.dump())
                        << '\n';
                }
                sink.write(out.str());
            } else {
                sink.write(j.dump(2));
            }
        } else if (cmd_sets->parsed()) {
            manifest.subcommand = "sets";
            const StructuredSet set = *parse_structured_set(set_str);
            const SetCount counts = set_count(set, limit);
            if (format == "csv") {
                std::ostringstream out;
                out << "set,X,count,density,asymptotic_density\n"
                    << set_str << ',' << limit << ',' << counts.count << ','
                    << fmt12(counts.density) << ',' << fmt12(counts.asymptotic_density)
                    << '\n';
                sink.write(out.str());
            } else {
                json j = {{"set", set_str},
                          {"X", limit},
                          {"count", counts.count},
                          {"density", round12(counts.density)},
                          {"asymptotic_density", round12(counts.asymptotic_density)}};
                sink.write(j.dump(2));
            }
        }

        if (!out_path.empty()) manifest.outputs.push_back({{"path", out_path}});
        manifest.add_phase("total", total.elapsed());
        manifest.write();
    } catch (const CapacityError& e) {
        std::cerr << "capacity error: " << e.what() << '\n';
        return 3;
    } catch (const CacheError& e) {
        std::cerr << "cache error: " << e.what() << '\n';
        return 2;
    } catch (const DomainError& e) {
        std::cerr << "domain error: " << e.what() << '\n';
        return 2;
    } catch (const PreconditionError& e) {
        std::cerr << "precondition error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return exit_code;
}
