// rigor: prove / check nonlinear inequalities and certify LP infeasibility.
#include "rigor/lp.hpp"
#include "rigor/prover.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace rigor;

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UsageError("cannot read '" + path + "'");
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const fs::path& path, const std::string& data)
{
    std::ofstream out(path, std::ios::binary);
    if (!out || !(out << data)) throw std::runtime_error("cannot write '" + path.string() + "'");
}

void ensure_dir(const std::string& dir)
{
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw UsageError("cannot create directory '" + dir + "': " + ec.message());
}

int default_precision()
{
    const char* env = std::getenv("RIGOR_DEFAULT_PRECISION");
    if (!env || !*env) return 10;
    int v = 0;
    const std::string s = env;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || v < 1 || v > 1000) throw UsageError("RIGOR_DEFAULT_PRECISION must be an integer in [1, 1000]");
    return v;
}

std::string box_string(const Box& b)
{
    std::string out;
    for (std::size_t i = 0; i < b.size(); ++i) out += (i ? " x " : "") + b[i].to_string();
    return out;
}

json box_json(const Box& b)
{
    json a = json::array();
    for (const auto& e : b) a.push_back({e.lo().to_string(), e.hi().to_string()});
    return a;
}

std::string rational_string(const Rational& r)
{
    if (const auto d = exact_decimal(r)) return d->to_string();
    std::ostringstream s;
    s << r;
    return s.str();
}

void emit(const json& report, const std::string& format, const std::vector<std::string>& lines)
{
    if (format == "json") {
        std::cout << report.dump(2) << '\n';
    } else {
        for (const auto& l : lines) std::cout << l << '\n';
    }
}

std::vector<InequalitySpec> load_specs(const std::string& file, const std::vector<std::string>& only)
{
    auto specs = parse_specs(read_file(file));
    if (only.empty()) return specs;
    std::vector<InequalitySpec> kept;
    for (const auto& id : only) {
        const auto it = std::find_if(specs.begin(), specs.end(), [&](const auto& s) { return s.id == id; });
        if (it == specs.end()) throw UsageError("no inequality with id '" + id + "'");
        kept.push_back(*it);
    }
    return kept;
}

struct ProveArgs {
    std::string spec;
    std::string out = "certs";
    int precision = 0;
    int max_precision = 0;
    unsigned max_depth = 40;
    unsigned jobs = 1;
    std::vector<std::string> only;
    std::string report = "text";
};

int cmd_prove(const ProveArgs& a)
{
    auto specs = load_specs(a.spec, a.only);
    ProverConfig cfg;
    const int base = a.precision > 0 ? a.precision : default_precision();
    cfg.base_precision = Precision(base);
    cfg.max_precision = Precision(a.max_precision > 0 ? a.max_precision : std::max(40, base));
    cfg.max_depth = a.max_depth;
    cfg.workers = std::max(1u, a.jobs);
    try {
        cfg.validate();
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    ensure_dir(a.out);
    const auto results = batch_prove(specs, cfg);

    json report{{"command", "prove"}, {"items", json::array()}};
    json stats{{"items", json::array()}};
    std::vector<std::string> lines;
    std::size_t failed = 0;
    for (std::size_t i = 0; i < specs.size(); ++i) {
        const auto& s = specs[i];
        const auto& r = results[i];
        const auto& st = r.stats;
        json item{{"id", s.id}};
        if (r.proved()) {
            write_file(fs::path(a.out) / (s.id + ".cert"), serialize(r.certificate()));
            item["verdict"] = "Verified";
            item["cells"] = st.cells_processed;
            item["natural_leaves"] = st.cells_verified_natural;
            item["taylor_leaves"] = st.cells_verified_taylor;
            item["monotone_reductions"] = st.cells_reduced_monotone;
            item["max_depth"] = st.max_depth_reached;
            lines.push_back(s.id + ": Verified (" + std::to_string(st.cells_processed) + " cells, " + std::to_string(st.cells_verified_natural) + " natural, " +
                            std::to_string(st.cells_verified_taylor) + " taylor, " + std::to_string(st.cells_reduced_monotone) + " monotone, depth " +
                            std::to_string(st.max_depth_reached) + ")");
        } else {
            ++failed;
            const auto& f = r.failure();
            item["verdict"] = "Failure";
            item["reason"] = to_string(f.reason);
            item["cell"] = box_json(f.cell);
            item["detail"] = f.detail;
            lines.push_back(s.id + ": Failure " + to_string(f.reason) + " at " + box_string(f.cell) + ": " + f.detail);
        }
        report["items"].push_back(item);
        stats["items"].push_back({{"id", s.id}, {"wall_time_s", st.wall_time}, {"cells", st.cells_processed}});
    }
    report["summary"] = {{"total", specs.size()}, {"verified", specs.size() - failed}, {"failed", failed}};
    lines.push_back(std::to_string(specs.size() - failed) + "/" + std::to_string(specs.size()) + " verified");
    write_file(fs::path(a.out) / "stats.json", stats.dump(2) + "\n");
    emit(report, a.report, lines);
    return failed ? 1 : 0;
}

int cmd_check(const std::string& spec_file, const std::string& dir, const std::vector<std::string>& only, const std::string& format)
{
    const auto specs = load_specs(spec_file, only);
    json report{{"command", "check"}, {"items", json::array()}};
    std::vector<std::string> lines;
    std::size_t rejected = 0;
    for (const auto& s : specs) {
        const fs::path file = fs::path(dir) / (s.id + ".cert");
        CheckResult verdict = Rejected{"root", "certificate file missing"};
        if (fs::exists(file)) {
            try {
                verdict = check(s, deserialize(read_file(file.string())));
            } catch (const FormatError& e) {
                verdict = Rejected{"root", std::string("format error: ") + e.what()};
            }
        }
        if (const auto* r = std::get_if<Rejected>(&verdict)) {
            ++rejected;
            report["items"].push_back({{"id", s.id}, {"verdict", "Rejected"}, {"path", r->path}, {"reason", r->reason}});
            lines.push_back(s.id + ": Rejected at " + r->path + ": " + r->reason);
        } else {
            report["items"].push_back({{"id", s.id}, {"verdict", "Verified"}});
            lines.push_back(s.id + ": Verified");
        }
    }
    report["summary"] = {{"total", specs.size()}, {"verified", specs.size() - rejected}, {"rejected", rejected}};
    lines.push_back(std::to_string(specs.size() - rejected) + "/" + std::to_string(specs.size()) + " verified");
    emit(report, format, lines);
    return rejected ? 1 : 0;
}

std::string contradiction_string(const LpVerdict& v)
{
    std::string out;
    for (std::size_t j = 0; j < v.summed_coeffs.size(); ++j) out += (j ? " + " : "") + rational_string(v.summed_coeffs[j]) + "*x" + std::to_string(j + 1);
    return out + " <= " + rational_string(v.summed_rhs);
}

int cmd_lp(const std::string& sys_file, const std::string& hints_file, int digits, const std::string& out, const std::string& format)
{
    const auto systems = parse_lp_systems(read_file(sys_file));
    std::map<std::string, std::vector<Decimal>> hints;
    if (!hints_file.empty()) hints = parse_dual_hints(read_file(hints_file));
    std::vector<LinearSystem> relaxed;
    for (const auto& s : systems) {
        try {
            relaxed.push_back(relax(s, digits));
        } catch (const std::invalid_argument& e) {
            throw UsageError("system '" + s.id + "': " + e.what());
        }
        if (const auto it = hints.find(s.id); it != hints.end()) {
            const std::size_t len = it->second.size();
            if (len != relaxed.back().normalized_count() && len != relaxed.back().rows.size()) {
                throw UsageError("dual hint for '" + s.id + "' has " + std::to_string(len) + " entries; expected " + std::to_string(relaxed.back().rows.size()) + " or " +
                                 std::to_string(relaxed.back().normalized_count()));
            }
        }
    }
    ensure_dir(out);
    json report{{"command", "lp"}, {"items", json::array()}};
    json stats{{"items", json::array()}};
    std::vector<std::string> lines;
    std::size_t failed = 0;
    for (std::size_t k = 0; k < systems.size(); ++k) {
        const auto start = std::chrono::steady_clock::now();
        const auto& id = systems[k].id;
        const auto& sys = relaxed[k];
        std::optional<DualCertificate> dual;
        std::string source;
        std::string failure;
        if (const auto it = hints.find(id); it != hints.end()) {
            if (it->second.size() == sys.normalized_count()) {
                std::vector<Rational> lambda;
                for (const auto& d : it->second) lambda.push_back(d.to_rational());
                dual = make_dual(std::move(lambda));
                source = "hint";
            } else {
                dual = modify_dual(sys, it->second);
                source = "hint+modify";
                if (!dual) failure = "Hopeless";
            }
        } else if (const auto approx = find_dual_approx(sys)) {
            dual = modify_dual(sys, *approx);
            source = "simplex+modify";
            if (!dual) failure = "Hopeless";
        } else {
            failure = "NoCertificateFound";
        }
        json item{{"id", id}};
        if (dual) {
            const LpVerdict v = check_infeasible(sys, *dual);
            if (v.certified) {
                write_file(fs::path(out) / (id + ".lpcert"), serialize(make_lp_certificate(id, digits, v)));
                item["verdict"] = "Certified";
                item["dual_source"] = source;
                item["contradiction"] = contradiction_string(v);
                item["rhs"] = rational_string(v.summed_rhs);
                lines.push_back(id + ": Certified (" + source + "): " + contradiction_string(v));
            } else {
                failure = std::string("Rejected(") + to_string(v.reason) + ")";
            }
        }
        if (!failure.empty()) {
            ++failed;
            item["verdict"] = failure;
            lines.push_back(id + ": " + failure);
        }
        report["items"].push_back(item);
        stats["items"].push_back({{"id", id}, {"wall_time_s", std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count()}});
    }
    report["summary"] = {{"total", systems.size()}, {"certified", systems.size() - failed}, {"failed", failed}};
    lines.push_back(std::to_string(systems.size() - failed) + "/" + std::to_string(systems.size()) + " certified");
    write_file(fs::path(out) / "lpstats.json", stats.dump(2) + "\n");
    emit(report, format, lines);
    return failed ? 1 : 0;
}

int cmd_lp_check(const std::string& sys_file, const std::string& dir, const std::string& format)
{
    const auto systems = parse_lp_systems(read_file(sys_file));
    json report{{"command", "lp-check"}, {"items", json::array()}};
    std::vector<std::string> lines;
    std::size_t failed = 0;
    for (const auto& s : systems) {
        const fs::path file = fs::path(dir) / (s.id + ".lpcert");
        std::string problem;
        std::optional<LpVerdict> verdict;
        if (!fs::exists(file)) {
            problem = "certificate file missing";
        } else {
            try {
                const LpCertificate c = deserialize_lp_certificate(read_file(file.string()));
                if (c.id != s.id) throw FormatError("certificate is for '" + c.id + "'");
                verdict = check_lp_certificate(relax(s, c.digits), c);
                if (!verdict->certified) problem = std::string("Rejected(") + to_string(verdict->reason) + ")";
            } catch (const FormatError& e) {
                problem = std::string("format error: ") + e.what();
            } catch (const std::invalid_argument& e) {
                throw UsageError("system '" + s.id + "': " + e.what());
            }
        }
        if (problem.empty()) {
            report["items"].push_back({{"id", s.id}, {"verdict", "Certified"}, {"contradiction", contradiction_string(*verdict)}});
            lines.push_back(s.id + ": Certified: " + contradiction_string(*verdict));
        } else {
            ++failed;
            report["items"].push_back({{"id", s.id}, {"verdict", "Rejected"}, {"reason", problem}});
            lines.push_back(s.id + ": Rejected: " + problem);
        }
    }
    report["summary"] = {{"total", systems.size()}, {"certified", systems.size() - failed}, {"rejected", failed}};
    lines.push_back(std::to_string(systems.size() - failed) + "/" + std::to_string(systems.size()) + " certified");
    emit(report, format, lines);
    return failed ? 1 : 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"rigor: certified nonlinear inequalities and LP infeasibility"};
    app.require_subcommand(1);
    std::string report = "text";
    app.add_option("--report", report, "Report format")->check(CLI::IsMember({"text", "json"}));

    ProveArgs pa;
    auto* prove = app.add_subcommand("prove", "Search for certificates");
    prove->add_option("--spec", pa.spec, "Inequality file")->required();
    prove->add_option("--out", pa.out, "Certificate directory");
    prove->add_option("--precision", pa.precision, "Base significant digits")->check(CLI::Range(1, 1000));
    prove->add_option("--max-precision", pa.max_precision, "Maximum significant digits")->check(CLI::Range(1, 1000));
    prove->add_option("--max-depth", pa.max_depth, "Maximum subdivision depth")->check(CLI::Range(1, 200));
    prove->add_option("--jobs", pa.jobs, "Worker threads")->check(CLI::Range(1, 256));
    prove->add_option("--only", pa.only, "Restrict to these ids");
    prove->add_option("--report", report, "Report format")->check(CLI::IsMember({"text", "json"}));

    std::string spec_file, cert_dir;
    std::vector<std::string> only;
    auto* checkc = app.add_subcommand("check", "Replay certificates");
    checkc->add_option("--spec", spec_file, "Inequality file")->required();
    checkc->add_option("--cert", cert_dir, "Certificate directory")->required();
    checkc->add_option("--only", only, "Restrict to these ids");
    checkc->add_option("--report", report, "Report format")->check(CLI::IsMember({"text", "json"}));

    std::string sys_file, hints_file, lp_out = "certs";
    int digits = 2;
    auto* lp = app.add_subcommand("lp", "Certify LP infeasibility");
    lp->add_option("--sys", sys_file, "LP system file")->required();
    lp->add_option("--dual-hints", hints_file, "Dual hint file");
    lp->add_option("--digits", digits, "Decimal places of the relaxation")->check(CLI::Range(0, 30));
    lp->add_option("--out", lp_out, "Certificate directory");
    lp->add_option("--report", report, "Report format")->check(CLI::IsMember({"text", "json"}));

    auto* lpcheck = app.add_subcommand("lp-check", "Replay LP certificates");
    lpcheck->add_option("--sys", sys_file, "LP system file")->required();
    lpcheck->add_option("--cert", cert_dir, "Certificate directory")->required();
    lpcheck->add_option("--report", report, "Report format")->check(CLI::IsMember({"text", "json"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        pa.report = report;
        if (*prove) return cmd_prove(pa);
        if (*checkc) return cmd_check(spec_file, cert_dir, only, report);
        if (*lp) return cmd_lp(sys_file, hints_file, digits, lp_out, report);
        if (*lpcheck) return cmd_lp_check(sys_file, cert_dir, report);
    } catch (const ParseError& e) {
        std::cerr << "parse error at line " << e.line << ", column " << e.column << ": " << e.what() << '\n';
        return 2;
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 2;
}
