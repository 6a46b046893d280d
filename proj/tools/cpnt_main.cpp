// cpnt: batch front end. Every subcommand turns its flags into a config
// object; runs are driven from the config alone, so a manifest can be
// replayed or resumed.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "cpnt/cpnt.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using ojson = nlohmann::ordered_json;
using namespace cpnt;

namespace {

constexpr int kManifestSchema = 1;
constexpr const char* kCheckpointEnv = "CPNT_CHECKPOINT_DIR";

// ---------------------------------------------------------------------------
// helpers

std::uint64_t parse_count(const std::string& s, const char* what) {
    if (!s.empty() && s.find_first_not_of("0123456789") == std::string::npos) {
        try {
            return std::stoull(s);
        } catch (const std::exception&) {
            throw ValidationError(std::string(what) + ": value out of range");
        }
    }
    double d = 0;
    try {
        std::size_t used = 0;
        d = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
    } catch (const std::exception&) {
        throw ValidationError(std::string(what) + ": not a number: '" + s + "'");
    }
    if (!(d >= 0) || d != std::floor(d) || d >= 9.2e18) throw ValidationError(std::string(what) + ": expected a non-negative integer");
    return static_cast<std::uint64_t>(d);
}

std::vector<std::uint64_t> parse_list(const std::string& s, const char* what) {
    std::vector<std::uint64_t> out;
    std::istringstream in(s);
    std::string tok;
    while (std::getline(in, tok, ',')) out.push_back(parse_count(tok, what));
    if (out.empty()) throw ValidationError(std::string(what) + ": empty list");
    return out;
}

std::vector<double> parse_reals(const std::string& s, const char* what) {
    std::vector<double> out;
    std::istringstream in(s);
    std::string tok;
    while (std::getline(in, tok, ',')) {
        try {
            out.push_back(std::stod(tok));
        } catch (const std::exception&) {
            throw ValidationError(std::string(what) + ": not a number: '" + tok + "'");
        }
    }
    if (out.empty()) throw ValidationError(std::string(what) + ": empty list");
    return out;
}

std::string hex16(std::uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw ValidationError("cannot read " + p.string());
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

void write_file(const fs::path& p, const std::string& content) {
    const auto tmp = p.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp);
        out << content;
        if (!out) throw std::runtime_error("write failed: " + tmp);
    }
    fs::rename(tmp, p);
}

double num(long double v) { return static_cast<double>(v); }

std::string join(const std::vector<std::uint64_t>& v, const char* sep = ",") {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? sep : "") + std::to_string(v[i]);
    return s;
}

// ---------------------------------------------------------------------------
// Run context

struct Execution {
    fs::path out;
    unsigned workers = 1;
    std::optional<std::uint64_t> halt_at;
    bool resume = false;
    std::uint64_t checkpoint_every = 16;  // segments
};

class Run {
public:
    Run(json config, Execution ex) : config_(std::move(config)), ex_(std::move(ex)) { hash_ = fnv1a64(config_.dump()); }

    const json& config() const { return config_; }
    const Execution& ex() const { return ex_; }
    std::uint64_t hash() const { return hash_; }
    unsigned workers() const { return ex_.workers; }

    template <typename T>
    T get(const char* key) const {
        if (!config_.contains(key)) throw ValidationError(std::string("config: missing '") + key + "'");
        return config_.at(key).get<T>();
    }
    bool flag(const char* key) const { return config_.contains(key) && config_.at(key).get<bool>(); }

    void emit(const std::string& name, const std::string& content) {
        write_file(ex_.out / name, content);
        outputs_.push_back(name);
    }

    // CSV plus, when requested, its SVG plot.
    void emit_series(const std::string& stem, const std::string& csv, const std::string& title, const std::string& y_column) {
        emit(stem + ".csv", csv);
        if (flag("svg")) {
            PlotOptions po;
            po.title = title;
            po.y_column = y_column;
            po.log_x = flag("log_x");
            emit(stem + ".svg", svg_line_plot(csv, po));
        }
    }

    void emit_report(const ojson& report, const std::string& text) {
        emit("report.json", report.dump(2) + "\n");
        emit("report.txt", text);
    }

    ZeroSet load_zero_file(const std::string& path) {
        const auto bytes = read_file(path);
        std::istringstream in(bytes);
        auto zs = parse_zeros(in, fs::path(path).filename().string());
        inputs_.push_back({{"path", path}, {"fnv1a64", hex16(fnv1a64(bytes))}, {"L", zs.id.label()},
                           {"T", zs.T_complete}, {"count", zs.ordinates.size()}});
        return zs;
    }

    fs::path checkpoint_path() const {
        const char* env = std::getenv(kCheckpointEnv);
        const fs::path dir = env && *env ? fs::path(env) : ex_.out / "checkpoints";
        fs::create_directories(dir);
        return dir / (hex16(hash_) + ".ckpt");
    }

    // on_segment hook shared by the resumable scans
    template <typename Scanner>
    std::function<bool(std::uint64_t)> segment_hook(Scanner& s, std::uint64_t x_max) {
        return [this, &s, x_max](std::uint64_t boundary) {
            ++segments_;
            const bool halt = ex_.halt_at && boundary >= *ex_.halt_at && boundary <= x_max;
            if (halt || (ex_.checkpoint_every && segments_ % ex_.checkpoint_every == 0 && boundary <= x_max))
                s.checkpoint(hash_).write_atomic(checkpoint_path());
            if (halt) halted_at_ = boundary;
            return !halt;
        };
    }

    std::optional<std::uint64_t> halted_at() const { return halted_at_; }

    void finish_checkpoint() {
        std::error_code ec;
        if (const char* env = std::getenv(kCheckpointEnv); (env && *env) || fs::exists(ex_.out / "checkpoints"))
            fs::remove(checkpoint_path(), ec);
    }

    void remove_outputs() {
        for (const auto& o : outputs_) {
            std::error_code ec;
            fs::remove(ex_.out / o, ec);
        }
        outputs_.clear();
    }

    void write_manifest(const std::string& status, const std::string& error = "") const {
        ojson m;
        m["schema_version"] = kManifestSchema;
        m["tool"] = "cpnt";
        m["version"] = kVersion;
        m["command"] = config_.at("command");
        m["config"] = config_;
        m["config_hash"] = hex16(hash_);
        m["inputs"] = inputs_;
        m["status"] = status;
        if (halted_at_) m["resume_from"] = *halted_at_;
        if (!error.empty()) m["error"] = error;
        m["outputs"] = outputs_;
        write_file(ex_.out / "manifest.json", m.dump(2) + "\n");
    }

private:
    json config_;
    Execution ex_;
    std::uint64_t hash_ = 0;
    std::vector<std::string> outputs_;
    std::vector<ojson> inputs_ = {};
    std::uint64_t segments_ = 0;
    std::optional<std::uint64_t> halted_at_;
};

// ---------------------------------------------------------------------------
// Commands. Each reads only run.config().

void cmd_sieve_stats(Run& run) {
    const auto x_max = run.get<std::uint64_t>("xmax");
    const auto points = run.get<std::uint64_t>("points");
    if (x_max < 2) throw ValidationError("sieve-stats: xmax must be at least 2");
    PrimeSieve sieve(x_max + 1);
    std::uint64_t count = 0;
    CompensatedSum<long double> theta;
    std::ostringstream csv;
    csv << "x,pi,theta_minus_x,pi_minus_li\n";
    const std::uint64_t stride = points ? std::max<std::uint64_t>(1, x_max / points) : 0;
    std::uint64_t next = stride ? std::max<std::uint64_t>(2, stride) : x_max + 1;
    auto row = [&](std::uint64_t x) {
        const long double xl = static_cast<long double>(x);
        csv << x << "," << count << "," << decimal(theta.value() - xl) << "," << decimal(count - li(xl)) << "\n";
    };
    sieve.for_each_prime(Window{1, x_max + 1}, [&](std::uint64_t p) {
        while (next < p && next <= x_max) {
            row(next);
            next += stride;
        }
        ++count;
        theta.add(std::log(static_cast<long double>(p)));
    });
    while (next <= x_max) {
        row(next);
        next += stride;
    }
    const auto c = chebyshev_counts(sieve, static_cast<long double>(x_max));
    ojson rep;
    rep["schema_version"] = 1;
    rep["x_max"] = x_max;
    rep["pi"] = c.pi;
    rep["theta"] = num(c.theta);
    rep["psi"] = num(c.psi);
    rep["li"] = num(li(static_cast<long double>(x_max)));
    std::ostringstream txt;
    txt << "schema_version=1\nx_max=" << x_max << "\npi=" << c.pi << "\ntheta=" << decimal(c.theta, 21) << "\npsi=" << decimal(c.psi, 21)
        << "\nli=" << decimal(li(static_cast<long double>(x_max)), 21) << "\n";
    if (run.flag("sign_changes")) {
        if (x_max > 100'000'000) throw ValidationError("sieve-stats: --sign-changes is limited to xmax <= 1e8");
        const auto series = chebyshev_error_series(sieve, x_max, ChebyshevError::psi);
        const auto w = sign_change_count(series, static_cast<long double>(x_max));
        rep["psi_sign_changes"] = w.count;
        rep["psi_sign_changes_per_log_x"] = num(w.per_log_t);
        rep["gamma1_over_pi"] = num(w.gamma1_over_pi);
        txt << "psi_sign_changes=" << w.count << "\npsi_sign_changes_per_log_x=" << decimal(w.per_log_t)
            << "\ngamma1_over_pi=" << decimal(w.gamma1_over_pi) << "\n";
    }
    if (points) run.emit_series("series", csv.str(), "pi(x) - li(x)", "pi_minus_li");
    run.emit_report(rep, txt.str());
}

RaceSpec race_spec_from(const Run& run) {
    return RaceSpec::make(run.get<std::uint64_t>("q"), run.get<std::vector<std::uint64_t>>("classes"),
                          parse_race_weight(run.get<std::string>("weight")), parse_race_baseline(run.get<std::string>("baseline")));
}

void cmd_race(Run& run) {
    const auto spec = race_spec_from(run);
    const auto x_max = run.get<std::uint64_t>("xmax");
    const auto segment = run.get<std::uint64_t>("segment");
    RaceScanner scanner(spec, x_max);
    const auto ckpt = run.checkpoint_path();
    if (run.ex().resume && fs::exists(ckpt)) scanner = RaceScanner::restore(KeyValueRecord::read(ckpt), spec, x_max, run.hash());
    PrimeSieve sieve(x_max + 1);
    ScanOptions opt;
    opt.segment = segment;
    opt.workers = run.workers();
    opt.on_segment = run.segment_hook(scanner, x_max);
    scanner.run(sieve, opt);
    if (!scanner.done()) return;
    const auto rep = scanner.report();
    ojson j;
    j["schema_version"] = ScanReport::kSchemaVersion;
    j["spec"] = spec.describe();
    j["x_max"] = x_max;
    j["sign_change_total"] = rep.sign_change_total;
    ojson changes = ojson::array();
    for (std::size_t i = 0; i < rep.sign_changes.size() && i < 1000; ++i)
        changes.push_back({{"x", num(rep.sign_changes[i].x)}, {"before", rep.ordering_label(rep.sign_changes[i].before)},
                           {"after", rep.ordering_label(rep.sign_changes[i].after)}});
    j["sign_changes"] = changes;
    ojson crossings = ojson::object();
    for (std::size_t i = 0; i < rep.r(); ++i)
        for (std::size_t k = 0; k < rep.r(); ++k) {
            if (i == k) continue;
            const auto c = rep.crossing(i, k);
            crossings[spec.label(i) + ">" + spec.label(k)] = c ? ojson(num(*c)) : ojson(nullptr);
        }
    j["first_crossing"] = crossings;
    j["ties"] = {{"integers", rep.tie_integer_count}, {"natural_density", num(rep.tie_natural_density())},
                 {"log_density", num(rep.tie_log_density())}};
    ojson dens = ojson::object();
    for (std::uint32_t s = 0; s < rep.orderings(); ++s)
        if (rep.natural_measure[s] != 0)
            dens[rep.ordering_label(s)] = {{"natural", num(rep.natural_density(s))}, {"log", num(rep.log_density(s))}};
    j["orderings"] = dens;
    run.emit_report(j, rep.to_text());
    run.finish_checkpoint();
}

void summatory_scan(Run& run, SummatoryKind kind, const std::string& title) {
    const auto x_max = run.get<std::uint64_t>("xmax");
    const auto stride = run.get<std::uint64_t>("stride");
    SummatoryScanner scanner(kind, x_max, stride);
    const auto ckpt = run.checkpoint_path();
    if (run.ex().resume && fs::exists(ckpt)) scanner = SummatoryScanner::restore(KeyValueRecord::read(ckpt), kind, x_max, stride, run.hash());
    PrimeSieve sieve(x_max + 1);
    SummatoryOptions opt;
    opt.segment = run.get<std::uint64_t>("segment");
    opt.workers = run.workers();
    opt.on_segment = run.segment_hook(scanner, x_max);
    scanner.run(sieve, opt);
    if (!scanner.done()) return;
    const auto s = scanner.series();
    ojson j;
    j["schema_version"] = 1;
    j["kind"] = to_string(kind);
    j["x_max"] = x_max;
    j["stride"] = stride;
    j["final_value"] = num(s.final_value());
    j["normalizer"] = kind == SummatoryKind::minus2_omega ? "x" : "sqrt(x)";
    j["max_normalized"] = {{"value", num(s.max.normalized)}, {"x", s.max.x}};
    j["min_normalized"] = {{"value", num(s.min.normalized)}, {"x", s.min.x}};
    j["sup_abs_normalized"] = {{"value", num(s.sup_abs.normalized)}, {"x", s.sup_abs.x}};
    j["tail_sup_abs_normalized"] = {{"value", num(s.tail_sup_abs.normalized)}, {"x", s.tail_sup_abs.x}, {"from", s.tail_from}};
    ojson jumps = ojson::array();
    for (const auto& p : s.powers_of_two) jumps.push_back({{"k", p.k}, {"before", num(p.before)}, {"at", num(p.at)}});
    j["powers_of_two"] = jumps;
    if (s.has_log_densities()) {
        j["log_density_plus"] = num(s.log_density_plus());
        j["log_density_minus"] = num(s.log_density_minus());
    }
    run.emit_series("series", s.to_csv(), title, "normalized");
    run.emit_report(j, s.to_text());
    run.finish_checkpoint();
}

void cmd_summatory(Run& run) {
    const auto kind = parse_summatory_kind(run.get<std::string>("kind"));
    summatory_scan(run, kind, to_string(kind) + "(x) / " + (kind == SummatoryKind::minus2_omega ? "x" : "sqrt(x)"));
}

void cmd_bias(Run& run) {
    const auto which = run.get<std::string>("which");
    if (which == "shanks") return summatory_scan(run, SummatoryKind::shanks, "sum lambda(n) chi_-4(n) / sqrt(x)");
    if (which == "pplus") return summatory_scan(run, SummatoryKind::pplus_chi, "sum chi_-4(P+(n)) / sqrt(x)");
    const auto q = run.get<std::uint64_t>("q"), a = run.get<std::uint64_t>("a"), b = run.get<std::uint64_t>("b");
    const auto x_max = run.get<std::uint64_t>("xmax");
    PrimeSieve sieve(x_max + 1);
    const auto w = weighted_bias(sieve, q, a, b, static_cast<long double>(x_max));
    ojson j{{"schema_version", 1}, {"q", q}, {"a", a}, {"b", b}, {"x_max", x_max}, {"value", num(w.value)}, {"half_loglog", num(w.half_loglog)}};
    std::ostringstream t;
    t << "schema_version=1\nq=" << q << "\na=" << a << "\nb=" << b << "\nx_max=" << x_max << "\nvalue=" << decimal(w.value, 21)
      << "\nhalf_loglog=" << decimal(w.half_loglog, 21) << "\n";
    run.emit_report(j, t.str());
}

ojson error_scan_json(const ErrorScan& s) {
    return {{"schema_version", 1},
            {"x_max", s.x_max},
            {"value_at_x_max", num(s.value_at_x_max)},
            {"infimum", num(s.inf)},
            {"infimum_at", s.arg_inf},
            {"infimum_is_left_limit", s.inf_is_left_limit},
            {"positive_throughout", s.all_positive}};
}

void cmd_mertens_error(Run& run) {
    const auto x_max = run.get<std::uint64_t>("xmax");
    PrimeSieve sieve(x_max + 1);
    const auto s = mertens_first_scan(sieve, x_max);
    run.emit_report(error_scan_json(s), s.to_text("sum_{p<=x} log p / p - log x - E"));
}

void cmd_field_mertens(Run& run) {
    const auto x_max = run.get<std::uint64_t>("xmax");
    const auto f = QuadraticField::make(run.get<std::uint64_t>("d"));
    PrimeSieve sieve(x_max + 1);
    const auto s = mertens_third_scan(sieve, f, x_max);
    auto j = error_scan_json(s);
    j["field"] = f.name();
    j["kappa"] = num(f.kappa);
    run.emit_report(j, "field=" + f.name() + "\n" + s.to_text("prod_{N p<=x} (1 - 1/N p)^{-1} - e^gamma kappa log x"));
}

void cmd_integral(Run& run) {
    const auto x_max = run.get<std::uint64_t>("xmax");
    const auto q = run.get<std::uint64_t>("q"), a = run.get<std::uint64_t>("a");
    const auto origin = run.get<std::string>("origin") == "zero" ? IntegralOrigin::zero : IntegralOrigin::two;
    PrimeSieve sieve(x_max + 1);
    const auto s = averaged_integral_scan(sieve, x_max, q, a, origin);
    ojson j{{"schema_version", 1},
            {"q", q},
            {"a", a},
            {"origin", run.get<std::string>("origin")},
            {"x_max", x_max},
            {"value_at_x_max", num(s.value_at_x_max)},
            {"sup", num(s.sup)},
            {"argsup", num(s.argsup)},
            {"negative_throughout", s.all_negative},
            {"negative_from", num(s.last_nonnegative_below)}};
    std::ostringstream t;
    t << "schema_version=1\nq=" << q << "\na=" << a << "\norigin=" << run.get<std::string>("origin") << "\nx_max=" << x_max
      << "\nvalue_at_x_max=" << decimal(s.value_at_x_max) << "\nsup=" << decimal(s.sup) << " at " << decimal(s.argsup)
      << "\nnegative_throughout=" << (s.all_negative ? "true" : "false") << "\nnegative_from=" << decimal(s.last_nonnegative_below) << "\n";
    run.emit_report(j, t.str());
}

void cmd_forms(Run& run) {
    const auto f = BinaryQuadraticForm::make(run.get<std::int64_t>("A"), run.get<std::int64_t>("B"), run.get<std::int64_t>("C"));
    const auto x_max = run.get<std::uint64_t>("xmax");
    FormPrimeOptions opt;
    opt.memory_items = run.get<std::uint64_t>("memory_items");
    const auto n = count_form_primes(f, x_max, opt);
    const long double x = static_cast<long double>(x_max);
    const long double scale = std::pow(x, 0.75L) / std::log(x);
    ojson j{{"schema_version", 1}, {"form", {f.A, f.B, f.C}}, {"discriminant", f.discriminant()}, {"x_max", x_max},
            {"count", n}, {"count_over_x34_over_logx", num(n / scale)}};
    std::ostringstream t;
    t << "schema_version=1\nform=" << f.A << "," << f.B << "," << f.C << "\ndiscriminant=" << f.discriminant() << "\nx_max=" << x_max
      << "\ncount=" << n << "\ncount_over_x34_over_logx=" << decimal(n / scale) << "\n";
    run.emit_report(j, t.str());
}

void cmd_zeros(Run& run) {
    const auto which = run.get<std::string>("which");
    if (which == "find") {
        const auto id = LFunctionId::parse(run.get<std::string>("L"));
        FindZerosOptions opt;
        opt.workers = run.workers();
        const auto zs = find_zeros(id, run.get<double>("tmax"), opt);
        std::ostringstream file;
        {
            // same bytes as save_zeros
            const auto tmp = run.ex().out / ".zeros.tmp";
            save_zeros(zs, tmp);
            file << read_file(tmp);
            fs::remove(tmp);
        }
        run.emit(run.get<std::string>("file"), file.str());
        ojson j{{"schema_version", 1}, {"L", id.label()}, {"T", zs.T_complete}, {"count", zs.ordinates.size()},
                {"certified_count", zs.certified_count}, {"smooth_count", zs.smooth_count}, {"warning", zs.warning}};
        std::ostringstream t;
        t << "schema_version=1\nL=" << id.label() << "\nT=" << format_ordinate(zs.T_complete) << "\ncount=" << zs.ordinates.size()
          << "\ncertified_count=" << zs.certified_count << "\nsmooth_count=" << format_ordinate(zs.smooth_count) << "\n";
        if (!zs.ordinates.empty()) t << "first=" << format_ordinate(zs.ordinates.front()) << "\nlast=" << format_ordinate(zs.ordinates.back()) << "\n";
        if (zs.warning) t << "warning=" << zs.warning_text << "\n";
        run.emit_report(j, t.str());
        return;
    }
    auto zs = run.load_zero_file(run.get<std::string>("file"));
    if (which == "import") {
        // certify completeness against the argument-principle count
        const auto n = zero_count(zs.id, zs.T_complete);
        if (n.count != static_cast<long>(zs.ordinates.size()))
            throw CertificationError("zeros import: file lists " + std::to_string(zs.ordinates.size()) + " zeros below T=" +
                                     format_ordinate(zs.T_complete) + " but the argument principle gives " + std::to_string(n.count));
        // spot-check that listed ordinates are zeros: Z changes sign around each
        std::size_t checked = 0;
        for (std::size_t i = 0; i < zs.ordinates.size(); i += std::max<std::size_t>(1, zs.ordinates.size() / 50)) {
            const double g = zs.ordinates[i];
            const double h = std::max(1e-6, 10 * zs.precision);
            if (hardy_z(zs.id, g - h) * hardy_z(zs.id, g + h) > 0)
                throw CertificationError("zeros import: no sign change of Z near listed ordinate " + format_ordinate(g));
            ++checked;
        }
        std::ostringstream file;
        const auto tmp = run.ex().out / ".zeros.tmp";
        save_zeros(zs, tmp);
        file << read_file(tmp);
        fs::remove(tmp);
        run.emit("zeros.txt", file.str());
        ojson j{{"schema_version", 1}, {"L", zs.id.label()}, {"T", zs.T_complete}, {"count", zs.ordinates.size()},
                {"argument_principle_count", n.count}, {"sign_checks", checked}, {"provenance", zs.provenance_text()}};
        std::ostringstream t;
        t << "schema_version=1\nL=" << zs.id.label() << "\nT=" << format_ordinate(zs.T_complete) << "\ncount=" << zs.ordinates.size()
          << "\nargument_principle_count=" << n.count << "\nsign_checks=" << checked << "\nprovenance=" << zs.provenance_text() << "\n";
        run.emit_report(j, t.str());
        return;
    }
    if (which == "export") {
        const bool deriv = run.flag("derivatives");
        if (deriv) attach_derivatives(zs, run.workers());
        std::ostringstream csv;
        csv << (deriv ? "index,ordinate,zprime_re,zprime_im\n" : "index,ordinate\n");
        for (std::size_t i = 0; i < zs.ordinates.size(); ++i) {
            csv << i + 1 << "," << format_ordinate(zs.ordinates[i]);
            if (deriv) csv << "," << format_ordinate(zs.zprime[i].real()) << "," << format_ordinate(zs.zprime[i].imag());
            csv << "\n";
        }
        run.emit("zeros.csv", csv.str());
        return;
    }
    throw ValidationError("zeros: unknown action " + which);
}

ZeroSet zeros_for_formula(Run& run, double T, bool derivatives) {
    auto files = run.get<std::vector<std::string>>("zeros");
    ZeroSet zs;
    if (files.empty()) {
        FindZerosOptions opt;
        opt.workers = run.workers();
        zs = find_zeros(LFunctionId::zeta(), T, opt);
    } else {
        if (files.size() != 1) throw ValidationError("expected one zeta zero file");
        zs = run.load_zero_file(files[0]);
    }
    if (!zs.id.is_zeta()) throw ValidationError("zeta zeros required, got " + zs.id.label());
    if (T > zs.T_complete) throw ValidationError("T exceeds the certified height of the zero set");
    zs.ordinates.resize(zs.count_below(T));
    if (derivatives) attach_derivatives(zs, run.workers());
    return zs;
}

std::vector<double> x_grid(const Run& run) {
    if (run.config().contains("x") && !run.config().at("x").empty()) return run.get<std::vector<double>>("x");
    const auto lo = run.get<double>("xmin"), hi = run.get<double>("xmax");
    const auto n = run.get<std::uint64_t>("points");
    if (!(hi >= lo) || n == 0) throw ValidationError("explicit: need xmin <= xmax and points > 0");
    std::vector<double> out;
    for (std::uint64_t i = 0; i < n; ++i) out.push_back(n == 1 ? lo : std::round(lo + (hi - lo) * i / (n - 1)));
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

void cmd_explicit(Run& run) {
    const auto which = run.get<std::string>("which");
    const double T = run.get<double>("T");
    const bool mertens = which == "mertens";
    if (!mertens && which != "psi") throw ValidationError("explicit: unknown formula " + which);
    const auto zs = zeros_for_formula(run, T, mertens);
    const auto xs = x_grid(run);
    const double x_hi = *std::max_element(xs.begin(), xs.end());
    std::vector<long double> m0;
    std::unique_ptr<PrimeSieve> sieve;
    std::vector<long double> m;  // M(n); between integers M0 = M
    if (mertens) {
        m0 = mertens0_table(static_cast<std::uint64_t>(x_hi) + 1);
        m.assign(m0.size(), 0);
        for (std::size_t n = 1; n < m0.size(); ++n) m[n] = 2 * m0[n] - m[n - 1];
    }
    else sieve = std::make_unique<PrimeSieve>(static_cast<std::uint64_t>(x_hi) + 2);
    std::ostringstream csv;
    csv << "x,explicit,exact,difference,tail_estimate\n";
    std::size_t within = 0;
    long double worst = 0;
    for (double x : xs) {
        const auto e = mertens ? mertens_explicit(x, zs, T) : psi_explicit(x, zs, T);
        long double exact;
        if (mertens) {
            const auto n = static_cast<std::uint64_t>(std::floor(x));
            exact = x == std::floor(x) ? m0[n] : m[n];
        } else {
            exact = psi0_exact(*sieve, x);
        }
        const long double d = e.value - exact;
        within += std::fabs(d) < e.tail_estimate;
        worst = std::max(worst, std::fabs(d));
        csv << format_ordinate(x) << "," << decimal(e.value) << "," << decimal(exact) << "," << decimal(d) << "," << decimal(e.tail_estimate) << "\n";
    }
    ojson j{{"schema_version", 1},   {"formula", which},       {"T", T}, {"zeros_used", zs.count_below(T)}, {"points", xs.size()},
            {"within_tail_estimate", within}, {"max_abs_difference", num(worst)}, {"zeros", zs.id.label() + " " + zs.provenance_text()}};
    std::ostringstream t;
    t << "schema_version=1\nformula=" << which << "\nT=" << format_ordinate(T) << "\nzeros_used=" << zs.count_below(T)
      << "\nzeros=" << zs.id.label() << " " << zs.provenance_text() << "\npoints=" << xs.size() << "\nwithin_tail_estimate=" << within
      << "\nmax_abs_difference=" << decimal(worst) << "\n";
    run.emit_series("series", csv.str(), which + " explicit formula minus exact, T=" + format_ordinate(T), "difference");
    run.emit_report(j, t.str());
}

void cmd_moments(Run& run) {
    const auto ks = run.get<std::vector<double>>("k");
    const auto Ts = run.get<std::vector<double>>("T");
    const bool ng = run.flag("ng");
    const double T_max = *std::max_element(Ts.begin(), Ts.end());
    const auto zs = zeros_for_formula(run, T_max, true);
    std::vector<MomentResult> rows;
    for (double k : ks)
        for (double T : Ts) rows.push_back(ng ? ng_moment(zs, k, T) : zero_moments(zs, k, T));
    const auto csv = moment_csv(rows, ng);
    run.emit("moments.csv", csv);
    ojson arr = ojson::array();
    for (const auto& r : rows) arr.push_back({{"T", r.T}, {"k", r.k}, {"value", num(r.value)}, {"count", r.count}, {"ratio", num(r.ratio)}});
    ojson j{{"schema_version", 1}, {"kind", ng ? "zeta(2rho)/zeta'(rho)" : "1/zeta'(rho)"}, {"zeros", zs.id.label() + " " + zs.provenance_text()},
            {"rows", arr}};
    run.emit_report(j, "schema_version=1\nzeros=" + zs.id.label() + " " + zs.provenance_text() + "\n" + csv);
}

std::vector<ZeroSet> density_zeros(Run& run, const std::vector<LFunctionId>& needed, double T) {
    std::vector<ZeroSet> sets;
    for (const auto& f : run.get<std::vector<std::string>>("zeros")) sets.push_back(run.load_zero_file(f));
    for (const auto& id : needed) {
        const bool have = std::any_of(sets.begin(), sets.end(), [&](const ZeroSet& z) { return z.id.label() == id.label(); });
        if (have || !run.flag("compute_missing")) continue;
        FindZerosOptions opt;
        opt.workers = run.workers();
        sets.push_back(find_zeros(id, T, opt));
    }
    return sets;
}

double truncation_from(const Run& run, const std::vector<ZeroSet>& sets) {
    if (run.config().contains("truncation") && !run.config().at("truncation").is_null()) return run.get<double>("truncation");
    if (sets.empty()) throw ValidationError("density: give --truncation or zero files");
    double T = sets[0].T_complete;
    for (const auto& z : sets) T = std::min(T, z.T_complete);
    return T;
}

std::vector<LFunctionId> inducing_ids(std::uint64_t q) {
    std::vector<LFunctionId> ids;
    for (const auto& c : DirichletCharacter::all(q)) {
        if (c.is_principal()) continue;
        const auto id = LFunctionId::dirichlet(primitive_inducing(c));
        if (std::none_of(ids.begin(), ids.end(), [&](const LFunctionId& x) { return x.label() == id.label(); })) ids.push_back(id);
    }
    return ids;
}

ojson result_json(const DensityResult& r) {
    ojson j{{"event", r.event}, {"method", r.method}, {"delta", num(r.delta)}, {"error_estimate", num(r.error_estimate)}};
    if (r.method == "gil-pelaez") j["tail_effect"] = r.tail_effect < 0 ? ojson(nullptr) : ojson(num(r.tail_effect));
    if (r.method == "monte-carlo") {
        j["samples"] = r.samples;
        j["seed"] = r.seed;
        j["rng"] = "philox4x32-10";
    }
    return j;
}

void cmd_density(Run& run) {
    const auto which = run.get<std::string>("which");
    const bool pi_li = run.flag("pi_li");
    const double T_req = run.config().contains("truncation") && !run.config().at("truncation").is_null() ? run.get<double>("truncation") : 0;
    LimitingDistribution dist;
    std::vector<ZeroSet> sets;
    if (pi_li) {
        if (which != "two-way") throw ValidationError("density: --pi-li is a two-way event");
        sets = density_zeros(run, {LFunctionId::zeta()}, T_req);
        const auto it = std::find_if(sets.begin(), sets.end(), [](const ZeroSet& z) { return z.id.is_zeta(); });
        if (it == sets.end()) throw ValidationError("density: no zeros supplied for zeta");
        dist = build_pi_li_distribution(*it, truncation_from(run, {*it}));
    } else {
        const auto q = run.get<std::uint64_t>("q");
        const auto spec = RaceSpec::make(q, run.get<std::vector<std::uint64_t>>("classes"));
        sets = density_zeros(run, inducing_ids(q), T_req);
        dist = build_distribution(spec, sets, truncation_from(run, sets));
    }
    std::vector<DensityResult> results;
    ojson j;
    j["schema_version"] = 1;
    j["model"] = dist.description;
    j["truncation_height"] = dist.truncation_height;
    j["zeros"] = dist.provenance;
    if (which == "two-way") {
        if (!pi_li && dist.r != 2) throw ValidationError("density two-way: give exactly two classes");
        results.push_back(pi_li ? two_way_delta(dist) : two_way_delta(dist, 0, 1));
        if (!pi_li) results.push_back(two_way_delta(dist, 1, 0));
    } else if (which == "multi-way") {
        std::optional<OrderingClasses> classes;
        if (run.flag("symmetry")) {
            if (!run.get<std::vector<std::string>>("orderings").empty()) throw ValidationError("density: --symmetry needs all orderings");
            classes = symmetry_reduce(run.get<std::uint64_t>("q"), run.get<std::vector<std::uint64_t>>("classes"));
        }
        MultiWayOptions opt;
        opt.samples = run.get<std::uint64_t>("samples");
        opt.seed = run.get<std::uint64_t>("seed");
        opt.workers = run.workers();
        for (const auto& o : run.get<std::vector<std::string>>("orderings")) {
            std::vector<std::size_t> perm;
            std::istringstream in(o);
            std::string lab;
            while (std::getline(in, lab, '>')) {
                const auto it = std::find(dist.labels.begin(), dist.labels.end(), lab);
                if (it == dist.labels.end()) throw ValidationError("density: unknown class '" + lab + "' in ordering " + o);
                perm.push_back(static_cast<std::size_t>(it - dist.labels.begin()));
            }
            auto sorted = perm;
            std::sort(sorted.begin(), sorted.end());
            if (perm.size() != dist.r || std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
                throw ValidationError("density: ordering " + o + " must list every class once");
            opt.orderings.push_back(detail::lehmer_index(perm, dist.r));
        }
        results = multi_way_delta(dist, opt);
        if (classes) {
            ojson arr = ojson::array();
            for (std::size_t c = 0; c < classes->members.size(); ++c) {
                long double mean = 0, worst = 0;
                for (auto m : classes->members[c]) mean += results[m].delta;
                mean /= classes->members[c].size();
                for (auto m : classes->members[c])
                    if (results[m].error_estimate > 0) worst = std::max(worst, std::fabs(results[m].delta - mean) / results[m].error_estimate);
                arr.push_back({{"representative", join(classes->representatives[c], ">")}, {"size", classes->members[c].size()},
                               {"mean_delta", num(mean)}, {"max_deviation_in_se", num(worst)}});
            }
            j["symmetry_classes"] = arr;
        }
    } else {
        throw ValidationError("density: unknown mode " + which);
    }
    ojson arr = ojson::array();
    for (const auto& r : results) arr.push_back(result_json(r));
    j["results"] = arr;
    std::string text = density_report(dist, results);
    if (j.contains("symmetry_classes"))
        for (const auto& c : j["symmetry_classes"])
            text += "symmetry_class=" + c["representative"].get<std::string>() + " size=" + std::to_string(c["size"].get<std::size_t>()) +
                    " mean_delta=" + decimal(c["mean_delta"].get<double>()) + " max_deviation_se=" + decimal(c["max_deviation_in_se"].get<double>(), 4) + "\n";
    run.emit_report(j, text);
}

void dispatch(Run& run) {
    const auto cmd = run.get<std::string>("command");
    if (cmd == "sieve-stats") return cmd_sieve_stats(run);
    if (cmd == "race") return cmd_race(run);
    if (cmd == "summatory") return cmd_summatory(run);
    if (cmd == "mertens-error") return cmd_mertens_error(run);
    if (cmd == "field-mertens") return cmd_field_mertens(run);
    if (cmd == "zeros") return cmd_zeros(run);
    if (cmd == "explicit") return cmd_explicit(run);
    if (cmd == "moments") return cmd_moments(run);
    if (cmd == "density") return cmd_density(run);
    if (cmd == "bias") return cmd_bias(run);
    if (cmd == "integral") return cmd_integral(run);
    if (cmd == "forms") return cmd_forms(run);
    throw ValidationError("unknown command " + cmd);
}

int execute(json config, Execution ex) {
    fs::create_directories(ex.out);
    Run run(std::move(config), std::move(ex));
    try {
        dispatch(run);
    } catch (...) {
        run.remove_outputs();
        try {
            throw;
        } catch (const std::exception& e) {
            run.write_manifest("failed", e.what());
        }
        throw;
    }
    if (run.halted_at()) {
        run.write_manifest("incomplete");
        std::cerr << "halted at " << *run.halted_at() << "; resume with: cpnt resume --manifest " << (run.ex().out / "manifest.json").string() << "\n";
        return 0;
    }
    run.write_manifest("complete");
    return 0;
}

int resume(const fs::path& manifest_path, Execution ex) {
    const auto m = json::parse(read_file(manifest_path));
    if (m.value("schema_version", 0) != kManifestSchema) throw ValidationError("resume: unsupported manifest schema");
    const auto config = m.at("config");
    if (hex16(fnv1a64(config.dump())) != m.at("config_hash").get<std::string>())
        throw ValidationError("resume: manifest config does not match its hash; refusing to resume");
    if (m.at("status") == "complete") {
        std::cerr << "already complete\n";
        return 0;
    }
    ex.out = manifest_path.parent_path().empty() ? fs::path(".") : manifest_path.parent_path();
    ex.resume = true;
    return execute(config, std::move(ex));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"cpnt: computations in comparative prime number theory"};
    app.require_subcommand(1);
    app.fallthrough();  // global options may follow the subcommand
    Execution ex;
    std::string out = "cpnt-out";
    unsigned workers = default_workers();
    bool svg = false, log_x = false;
    std::string halt_at;
    app.add_option("--out", out, "output directory")->capture_default_str();
    app.add_option("--workers", workers, "worker threads (default: hardware)")->check(CLI::PositiveNumber);
    app.add_option("--checkpoint-every", ex.checkpoint_every, "checkpoint interval in segments (0: only when halting)")->capture_default_str();
    app.add_flag("--svg", svg, "also write SVG plots of CSV series");
    app.add_flag("--log-x", log_x, "log-scale x axis in plots");
    app.add_option("--halt-at", halt_at)->group("");

    json cfg;
    std::function<void()> build;

    // string-valued numeric options accept 1e8 style
    std::string xmax_s = "1000000", q_s, classes_s, kind, weight = "unit", baseline = "none", segment_s, stride_s;

    auto* sieve_cmd = app.add_subcommand("sieve-stats", "pi, theta, psi at x and an optional series");
    std::string points_s = "0";
    bool sign_changes = false;
    sieve_cmd->add_option("--xmax", xmax_s)->required();
    sieve_cmd->add_option("--points", points_s, "series rows (0: none)");
    sieve_cmd->add_flag("--sign-changes", sign_changes, "count sign changes of psi(x) - x");
    sieve_cmd->callback([&] {
        cfg = {{"command", "sieve-stats"}, {"xmax", parse_count(xmax_s, "--xmax")}, {"points", parse_count(points_s, "--points")},
               {"sign_changes", sign_changes}};
    });

    auto* race_cmd = app.add_subcommand("race", "scan a prime race");
    race_cmd->add_option("--q", q_s)->required();
    race_cmd->add_option("--classes", classes_s, "comma-separated residues")->required();
    race_cmd->add_option("--weight", weight, "unit|log|inv_sqrt")->capture_default_str();
    race_cmd->add_option("--baseline", baseline, "none|li|equal_share")->capture_default_str();
    race_cmd->add_option("--xmax", xmax_s)->required();
    race_cmd->add_option("--segment", segment_s, "segment length (checkpoint granularity)");
    race_cmd->callback([&] {
        cfg = {{"command", "race"},     {"q", parse_count(q_s, "--q")}, {"classes", parse_list(classes_s, "--classes")},
               {"weight", weight},      {"baseline", baseline},         {"xmax", parse_count(xmax_s, "--xmax")},
               {"segment", segment_s.empty() ? kDefaultSegment : parse_count(segment_s, "--segment")}};
    });

    auto* sum_cmd = app.add_subcommand("summatory", "summatory functions M, M0, L, S, shanks, pplus");
    sum_cmd->add_option("--kind", kind, "M|M0|L|S|shanks|pplus")->required();
    sum_cmd->add_option("--xmax", xmax_s)->required();
    sum_cmd->add_option("--stride", stride_s, "checkpoint-row spacing (default xmax/1000)");
    sum_cmd->add_option("--segment", segment_s, "segment length");
    auto summatory_cfg = [&](const std::string& command) {
        const auto x = parse_count(xmax_s, "--xmax");
        return json{{"command", command},
                    {"xmax", x},
                    {"stride", stride_s.empty() ? std::max<std::uint64_t>(1, x / 1000) : parse_count(stride_s, "--stride")},
                    {"segment", segment_s.empty() ? kDefaultFactorSegment : parse_count(segment_s, "--segment")}};
    };
    sum_cmd->callback([&] {
        cfg = summatory_cfg("summatory");
        cfg["kind"] = to_string(parse_summatory_kind(kind));
    });

    auto* me_cmd = app.add_subcommand("mertens-error", "sum log p / p - log x - E over [2, xmax]");
    me_cmd->add_option("--xmax", xmax_s)->required();
    me_cmd->callback([&] { cfg = {{"command", "mertens-error"}, {"xmax", parse_count(xmax_s, "--xmax")}}; });

    auto* fm_cmd = app.add_subcommand("field-mertens", "Mertens' third theorem over a real quadratic field");
    std::string d_s = "1";
    fm_cmd->add_option("--d", d_s, "squarefree d (1: Q)")->capture_default_str();
    fm_cmd->add_option("--xmax", xmax_s)->required();
    fm_cmd->callback([&] { cfg = {{"command", "field-mertens"}, {"d", parse_count(d_s, "--d")}, {"xmax", parse_count(xmax_s, "--xmax")}}; });

    auto* zeros_cmd = app.add_subcommand("zeros", "find, import or export zero files");
    zeros_cmd->require_subcommand(1);
    std::string L = "zeta", file, tmax_s;
    bool derivatives = false;
    auto* zf = zeros_cmd->add_subcommand("find", "compute zeros with certified completeness");
    zf->add_option("--L", L, "zeta or dirichlet:q:e1,e2,...")->capture_default_str();
    zf->add_option("--tmax", tmax_s)->required();
    zf->add_option("--file", file, "output file name in --out (default zeros.txt)");
    zf->callback([&] {
        cfg = {{"command", "zeros"}, {"which", "find"}, {"L", LFunctionId::parse(L).label()}, {"tmax", std::stod(tmax_s)},
               {"file", file.empty() ? "zeros.txt" : file}};
    });
    auto* zi = zeros_cmd->add_subcommand("import", "validate a zero file against the argument-principle count");
    zi->add_option("--file", file)->required();
    zi->callback([&] { cfg = {{"command", "zeros"}, {"which", "import"}, {"file", file}}; });
    auto* ze = zeros_cmd->add_subcommand("export", "write a zero file as CSV");
    ze->add_option("--file", file)->required();
    ze->add_flag("--derivatives", derivatives, "include L'(rho)");
    ze->callback([&] { cfg = {{"command", "zeros"}, {"which", "export"}, {"file", file}, {"derivatives", derivatives}}; });

    std::vector<std::string> zero_files;
    std::string T_s, xmin_s = "100", xs_s;
    auto* ex_cmd = app.add_subcommand("explicit", "truncated explicit formulas against exact values");
    ex_cmd->require_subcommand(1);
    for (const char* which : {"psi", "mertens"}) {
        auto* s = ex_cmd->add_subcommand(which, std::string(which) + " explicit formula");
        s->add_option("--zeros", zero_files, "zeta zero file (default: compute)");
        s->add_option("--T", T_s, "truncation height")->required();
        s->add_option("--x", xs_s, "comma-separated x values");
        s->add_option("--xmin", xmin_s)->capture_default_str();
        s->add_option("--xmax", xmax_s);
        s->add_option("--points", points_s, "grid points between xmin and xmax");
        s->callback([&, which] {
            cfg = {{"command", "explicit"}, {"which", which},         {"zeros", zero_files},
                   {"T", std::stod(T_s)},   {"xmin", std::stod(xmin_s)}, {"xmax", std::stod(xmax_s)},
                   {"points", parse_count(points_s == "0" ? "200" : points_s, "--points")},
                   {"x", xs_s.empty() ? std::vector<double>{} : parse_reals(xs_s, "--x")}};
        });
    }

    std::string ks_s = "1";
    bool ng = false;
    auto* mo_cmd = app.add_subcommand("moments", "discrete moments over zeta zeros");
    mo_cmd->add_option("--zeros", zero_files, "zeta zero file (default: compute)");
    mo_cmd->add_option("--k", ks_s, "comma-separated exponents")->capture_default_str();
    mo_cmd->add_option("--T", T_s, "comma-separated heights")->required();
    mo_cmd->add_flag("--ng", ng, "sum |zeta(2 rho) / zeta'(rho)|^{2k}");
    mo_cmd->callback([&] {
        cfg = {{"command", "moments"}, {"zeros", zero_files}, {"k", parse_reals(ks_s, "--k")}, {"T", parse_reals(T_s, "--T")}, {"ng", ng}};
    });

    auto* de_cmd = app.add_subcommand("density", "limiting logarithmic densities under GRH and LI");
    de_cmd->require_subcommand(1);
    bool pi_li = false, compute_missing = false, symmetry = false;
    std::string trunc_s, samples_s = "1000000", seed_s = "1";
    std::vector<std::string> orderings;
    for (const char* which : {"two-way", "multi-way"}) {
        auto* s = de_cmd->add_subcommand(which, which == std::string("two-way") ? "Gil-Pelaez inversion" : "seeded Monte Carlo");
        s->add_option("--zeros", zero_files, "zero files, one per L-function");
        s->add_option("--truncation", trunc_s, "zero height cutoff (default: lowest certified height)");
        s->add_flag("--compute-missing", compute_missing, "compute zeros not supplied by files");
        s->add_option("--q", q_s);
        s->add_option("--classes", classes_s);
        if (which == std::string("two-way")) {
            s->add_flag("--pi-li", pi_li, "pi(x) against li(x)");
        } else {
            s->add_option("--samples", samples_s)->capture_default_str();
            s->add_option("--seed", seed_s)->capture_default_str();
            s->add_option("--ordering", orderings, "ordering like 1>3>4 (repeatable; default all)");
            s->add_flag("--symmetry", symmetry, "group orderings by the symmetries of the race");
        }
        s->callback([&, which] {
            cfg = {{"command", "density"}, {"which", which}, {"zeros", zero_files}, {"compute_missing", compute_missing}, {"pi_li", pi_li}};
            cfg["truncation"] = trunc_s.empty() ? json(nullptr) : json(std::stod(trunc_s));
            if (!pi_li) {
                if (q_s.empty() || classes_s.empty()) throw ValidationError("density: give --pi-li or --q and --classes");
                cfg["q"] = parse_count(q_s, "--q");
                cfg["classes"] = parse_list(classes_s, "--classes");
            }
            if (which == std::string("multi-way")) {
                cfg["samples"] = parse_count(samples_s, "--samples");
                cfg["seed"] = parse_count(seed_s, "--seed");
                cfg["orderings"] = orderings;
                cfg["symmetry"] = symmetry;
            }
        });
    }

    auto* bias_cmd = app.add_subcommand("bias", "weighted and multiplicative biases");
    bias_cmd->require_subcommand(1);
    std::string a_s = "3", b_s = "1";
    auto* bk = bias_cmd->add_subcommand("koyama", "sum over p = a mod q of p^{-1/2} minus the same for b");
    std::string bq_s = "4";
    bk->add_option("--q", bq_s)->capture_default_str();
    bk->add_option("--a", a_s)->capture_default_str();
    bk->add_option("--b", b_s)->capture_default_str();
    bk->add_option("--xmax", xmax_s)->required();
    bk->callback([&] {
        cfg = {{"command", "bias"}, {"which", "koyama"}, {"q", parse_count(bq_s, "--q")}, {"a", parse_count(a_s, "--a")},
               {"b", parse_count(b_s, "--b")}, {"xmax", parse_count(xmax_s, "--xmax")}};
    });
    for (const char* which : {"shanks", "pplus"}) {
        auto* s = bias_cmd->add_subcommand(which, which == std::string("shanks") ? "sum lambda(n) chi_-4(n)" : "sum chi_-4(P+(n))");
        s->add_option("--xmax", xmax_s)->required();
        s->add_option("--stride", stride_s);
        s->add_option("--segment", segment_s);
        s->callback([&, which] {
            cfg = summatory_cfg("bias");
            cfg["which"] = which;
        });
    }

    auto* in_cmd = app.add_subcommand("integral", "averaged race integrals");
    in_cmd->require_subcommand(1);
    auto* a1 = in_cmd->add_subcommand("a1pi", "int (phi(q) pi(t; q, a) - li t) dt over (2, x]");
    std::string iq_s = "1", ia_s = "0", origin = "two";
    a1->add_option("--xmax", xmax_s)->required();
    a1->add_option("--q", iq_s)->capture_default_str();
    a1->add_option("--a", ia_s)->capture_default_str();
    a1->add_option("--origin", origin, "two|zero")->capture_default_str()->check(CLI::IsMember({"two", "zero"}));
    a1->callback([&] {
        cfg = {{"command", "integral"}, {"which", "a1pi"}, {"xmax", parse_count(xmax_s, "--xmax")}, {"q", parse_count(iq_s, "--q")},
               {"a", parse_count(ia_s, "--a")}, {"origin", origin}};
    });

    auto* fo_cmd = app.add_subcommand("forms", "primes represented by binary quadratic forms");
    fo_cmd->require_subcommand(1);
    auto* fc = fo_cmd->add_subcommand("count", "distinct primes p <= x with p = f(a, b^2)");
    std::int64_t fA = 1, fB = 0, fC = 1;
    std::string mem_s = "16777216";
    fc->add_option("--A", fA)->capture_default_str();
    fc->add_option("--B", fB)->capture_default_str();
    fc->add_option("--C", fC)->capture_default_str();
    fc->add_option("--xmax", xmax_s)->required();
    fc->add_option("--memory-items", mem_s, "in-memory values before spilling to disk")->capture_default_str();
    fc->callback([&] {
        cfg = {{"command", "forms"}, {"A", fA}, {"B", fB}, {"C", fC}, {"xmax", parse_count(xmax_s, "--xmax")},
               {"memory_items", parse_count(mem_s, "--memory-items")}};
    });

    auto* re_cmd = app.add_subcommand("resume", "continue an interrupted run from its manifest");
    std::string manifest;
    re_cmd->add_option("--manifest", manifest)->required();

    try {
        try {
            app.parse(argc, argv);
        } catch (const CLI::ParseError& e) {
            const int rc = app.exit(e);
            return rc == 0 ? 0 : 2;
        }
        ex.out = out;
        ex.workers = workers;
        if (!halt_at.empty()) ex.halt_at = parse_count(halt_at, "--halt-at");
        if (re_cmd->parsed()) return resume(manifest, ex);
        cfg["svg"] = svg;
        cfg["log_x"] = log_x;
        return execute(cfg, ex);
    } catch (const CertificationError& e) {
        std::cerr << "certification failure: " << e.what() << "\n";
        return 3;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const DomainError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const json::exception& e) {
        std::cerr << "error: bad manifest or config: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 1;
    }
}
