// schedsketch: command-line front end for the streaming and sampling
// makespan approximation schemes, the oracles and the instance generators.

#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include <schedsketch/schedsketch.hpp>

namespace ss = schedsketch;
using nlohmann::json;

namespace {

enum Exit { ok = 0, arg_error = 2, input_violation = 3, infeasible = 4 };

struct Common {
    double epsilon = 0.3;
    std::int64_t m = 1;
    std::optional<ss::Time> c;
    std::optional<ss::Depth> h;
    double alpha = 1.0;
    std::optional<std::uint64_t> n;
    std::uint64_t seed = 0;
    double confidence_scale = 1.0;
    bool tight = false;
    std::string in;
    std::string out;
    std::string format = "json";
    std::size_t trials = 1;

    ss::AlgoParams params() const
    {
        ss::AlgoParams p;
        p.epsilon = epsilon;
        p.m = m;
        p.c = c;
        p.h = h;
        p.alpha = alpha;
        p.n = n;
        p.seed = seed;
        p.confidence_scale = confidence_scale;
        p.tight = tight;
        return p;
    }
};

void add_param_flags(CLI::App* cmd, Common& o)
{
    cmd->add_option("--epsilon", o.epsilon, "accuracy parameter in (0,1)")->capture_default_str();
    cmd->add_option("--m", o.m, "number of machines")->capture_default_str();
    cmd->add_option("--c", o.c, "bound on the processing-time ratio");
    cmd->add_option("--h", o.h, "bound on the depth");
    cmd->add_option("--alpha", o.alpha, "fraction of large jobs in (0,1]")->capture_default_str();
    cmd->add_option("--n", o.n, "number of jobs");
    cmd->add_option("--seed", o.seed, "random seed")->capture_default_str();
    cmd->add_option("--confidence-scale", o.confidence_scale, "multiplier on sample sizes")->capture_default_str();
    cmd->add_flag("--tight", o.tight, "skip empty depth levels (no guarantee)");
}

// Output goes to --out when given, else stdout.
class Sink {
public:
    explicit Sink(const std::string& path)
    {
        if (!path.empty() && path != "-") {
            file_ = std::make_unique<std::ofstream>(path);
            if (!*file_)
                throw ss::param_error("cannot open output file '" + path + "'");
        }
    }
    std::ostream& stream() { return file_ ? *file_ : std::cout; }

private:
    std::unique_ptr<std::ofstream> file_;
};

std::ifstream open_input(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ss::param_error("cannot open input '" + path + "'");
    return in;
}

ss::Instance load_instance(const std::string& in)
{
    if (in.empty())
        throw ss::param_error("--in is required");
    if (ss::looks_like_gen_spec(in))
        return ss::generate(ss::parse_gen_spec(in));
    auto file = open_input(in);
    return ss::read_instance(file);
}

std::string csv_row(const ss::RunReport& r)
{
    std::ostringstream os;
    os << ss::algorithm_name(r.algorithm) << ',' << json(r.A).dump() << ',';
    for (std::size_t i = 0; i < r.sks.t.size(); ++i)
        os << (i ? ";" : "") << r.sks.t[i];
    os << ',' << r.sketch_nodes << ',' << r.samples_drawn << ',' << r.update_count << ','
       << (r.guarantee_condition_met ? "true" : "false") << ',' << r.params.seed;
    return os.str();
}

constexpr const char* csv_header = "algorithm,A,sks,sketch_nodes,samples,update_count,guarantee_condition_met,seed";

void emit_reports(const Common& o, const std::vector<ss::RunReport>& reports, bool batch)
{
    Sink sink(o.out);
    auto& out = sink.stream();
    if (o.format == "csv") {
        out << csv_header << '\n';
        for (const auto& r : reports)
            out << csv_row(r) << '\n';
        return;
    }
    if (batch)
        out << json{{"trials", reports}}.dump(2) << '\n';
    else
        out << json(reports.front()).dump(2) << '\n';
}

int run_stream(ss::Algorithm algo, const Common& o)
{
    if (o.in.empty())
        throw ss::param_error("--in is required");
    const auto params = o.params();
    ss::derive_params(params, algo); // parameter errors before touching the input
    ss::RunReport report;
    if (ss::looks_like_gen_spec(o.in)) {
        const auto inst = ss::generate(ss::parse_gen_spec(o.in));
        ss::InstanceEventSource src(inst);
        report = ss::run_streaming(algo, src, params);
    } else {
        auto file = open_input(o.in);
        ss::InstanceLineReader src(file);
        report = ss::run_streaming(algo, src, params);
    }
    emit_reports(o, {report}, false);
    return ok;
}

template <class Access>
std::vector<ss::RunReport> sample_trials(ss::Algorithm algo, const Access& access, const Common& o)
{
    auto params = o.params();
    if (params.n && *params.n != access.size())
        throw ss::input_error("--n " + std::to_string(*params.n) + " does not match the instance size " +
                              std::to_string(access.size()));
    params.n = access.size();
    ss::derive_params(params, algo);
    return ss::run_trials<ss::RunReport>(o.trials, [&](std::size_t i) {
        auto p = params;
        p.seed = params.seed + i;
        return ss::run_sampling(algo, access, p);
    });
}

std::vector<ss::RunReport> sample_from_input(ss::Algorithm algo, const Common& o)
{
    if (o.in.empty())
        throw ss::param_error("--in is required");
    if (ss::looks_like_gen_spec(o.in)) {
        const auto spec = ss::parse_gen_spec(o.in);
        if (auto access = ss::implicit_access(spec))
            return std::visit([&](const auto& a) { return sample_trials(algo, a, o); }, *access);
        const auto inst = ss::generate(spec);
        return sample_trials(algo, ss::MaterializedAccess(inst.jobs), o);
    }
    auto inst = load_instance(o.in);
    if (!inst.has_depths())
        inst = ss::with_computed_depths(std::move(inst));
    return sample_trials(algo, ss::MaterializedAccess(inst.jobs), o);
}

int run_sample(ss::Algorithm algo, const Common& o)
{
    if (o.trials < 1)
        throw ss::param_error("--trials must be at least 1");
    emit_reports(o, sample_from_input(algo, o), o.trials > 1);
    return ok;
}

struct ScheduleOpts {
    std::string in;
    std::string sks;
    std::optional<std::int64_t> m;
    std::string out;
    std::string report;
};

int run_schedule(const ScheduleOpts& o)
{
    if (o.in.empty() || o.sks.empty())
        throw ss::param_error("schedule needs --in and --sks");
    ss::RunReport result;
    {
        auto f = open_input(o.sks);
        try {
            result = json::parse(f).get<ss::RunReport>();
        } catch (const json::exception& e) {
            throw ss::input_error(std::string("malformed result file: ") + e.what());
        }
    }
    const std::int64_t m = o.m.value_or(result.params.m);

    ss::ConcreteSchedule sched;
    ss::Instance inst;
    if (ss::looks_like_gen_spec(o.in)) {
        inst = ss::generate(ss::parse_gen_spec(o.in));
        ss::InstanceEventSource src(inst);
        if (!result.depths.empty()) {
            ss::WithDepths with(src, result.depths);
            sched = ss::sketch_to_schedule(result.sks, with, m);
        } else {
            sched = ss::sketch_to_schedule(result.sks, src, m);
        }
    } else {
        auto file = open_input(o.in);
        ss::InstanceLineReader src(file);
        if (!result.depths.empty()) {
            ss::WithDepths with(src, result.depths);
            sched = ss::sketch_to_schedule(result.sks, with, m);
        } else {
            sched = ss::sketch_to_schedule(result.sks, src, m);
        }
        auto again = open_input(o.in);
        inst = ss::read_instance(again);
    }

    {
        Sink sink(o.out);
        ss::write_schedule_csv(sink.stream(), sched);
    }
    const auto violations = ss::validate_schedule(sched, inst, m);
    const ss::Time t_h = result.sks.t.empty() ? 0 : result.sks.t.back();
    const json report{{"makespan", sched.makespan}, {"t_h", t_h}, {"violations", ss::violations_json(violations)}};
    if (!o.report.empty()) {
        Sink sink(o.report);
        sink.stream() << report.dump(2) << '\n';
    }
    std::cerr << "makespan " << sched.makespan << ", t_h " << t_h << ", violations " << violations.size() << '\n';
    if (!violations.empty()) {
        std::cerr << ss::violations_json(violations).dump(2) << '\n';
        return infeasible;
    }
    return ok;
}

struct OracleOpts {
    std::string in;
    std::int64_t m = 1;
    std::string out;
    std::string format = "text";
};

int run_oracle(const std::string& kind, const OracleOpts& o)
{
    const auto inst = load_instance(o.in);
    const ss::Time lb = ss::makespan_lower_bound(inst, o.m);
    ss::Time makespan = 0;
    if (kind == "exact") {
        makespan = ss::exact_makespan(inst, o.m);
    } else {
        const auto sched = ss::list_schedule(inst, o.m);
        makespan = sched.makespan;
        if (!o.out.empty()) {
            Sink sink(o.out);
            ss::write_schedule_csv(sink.stream(), sched);
        }
    }
    if (o.format == "json")
        std::cout << json{{"oracle", kind}, {"makespan", makespan}, {"lower_bound", lb}}.dump(2) << '\n';
    else
        std::cout << makespan << '\n';
    return ok;
}

struct GenOpts {
    std::string family;
    std::string spec;
    std::int64_t m = 1;
    std::int64_t q = 1;
    ss::Depth h = 1;
    std::uint64_t n = 1;
    ss::Time c = 1;
    double alpha = 1.0;
    ss::Time p_big = 1;
    ss::Time small_max = 1;
    ss::Time p_lo = 1;
    ss::Time p_hi = 1;
    double density = 0.2;
    std::uint64_t width = 1;
    std::uint64_t seed = 0;
    std::string out;
    std::string meta;
};

ss::FamilySpec gen_family(const GenOpts& o)
{
    if (!o.spec.empty())
        return ss::parse_gen_spec(o.spec);
    if (o.family == "chain")
        return ss::ChainFamily{o.m, o.q, o.h, o.seed};
    if (o.family == "uniform")
        return ss::UniformFamily{o.n, o.p_lo, o.p_hi, o.h, o.seed};
    if (o.family == "layered")
        return ss::LayeredFamily{o.width, o.h, o.c, o.seed};
    if (o.family == "alpha-mixed")
        return ss::AlphaMixedFamily{o.n, o.alpha, o.c, o.p_big, o.small_max, o.h, o.seed};
    if (o.family == "random-dag")
        return ss::RandomDagFamily{o.n, o.h, o.density, o.c, o.seed};
    throw ss::param_error("unknown or missing --family");
}

int run_gen(const GenOpts& o)
{
    const auto inst = ss::generate(gen_family(o));
    {
        Sink sink(o.out);
        ss::write_instance(sink.stream(), inst);
    }
    std::string meta_path = o.meta;
    if (meta_path.empty() && !o.out.empty() && o.out != "-")
        meta_path = o.out + ".meta.json";
    if (!meta_path.empty()) {
        Sink sink(meta_path);
        sink.stream() << json(inst.meta).dump(2) << '\n';
    }
    return ok;
}

struct BenchOpts {
    std::string algo = "stream1";
};

// Reference makespan for a bench row: the known optimum, else the exact
// oracle when small enough, else the trivial lower bound.
ss::Time reference_makespan(const ss::Instance& inst, std::int64_t m)
{
    if (inst.meta.known_cstar && (!inst.meta.m || *inst.meta.m == m))
        return *inst.meta.known_cstar;
    if (inst.n() <= ss::exact_max_jobs && m <= ss::exact_max_machines)
        return ss::exact_makespan(inst, m);
    return ss::makespan_lower_bound(inst, m);
}

ss::FamilySpec reseed(ss::FamilySpec spec, std::uint64_t offset)
{
    std::visit([&](auto& f) { f.seed += offset; }, spec);
    return spec;
}

int run_bench(const BenchOpts& b, const Common& o)
{
    const auto algo = ss::parse_algorithm(b.algo);
    if (o.trials < 1)
        throw ss::param_error("--trials must be at least 1");
    if (o.in.empty())
        throw ss::param_error("--in is required");
    const bool gen = ss::looks_like_gen_spec(o.in);
    const auto base_spec = gen ? std::optional(ss::parse_gen_spec(o.in)) : std::nullopt;
    const auto file_inst = gen ? std::optional<ss::Instance>() : std::optional(load_instance(o.in));

    struct Row {
        std::uint64_t seed;
        double A;
        ss::Time reference;
        std::uint64_t samples;
        std::size_t nodes;
    };
    const auto rows = ss::run_trials<Row>(o.trials, [&](std::size_t i) {
        auto inst = base_spec ? ss::generate(reseed(*base_spec, i)) : *file_inst;
        auto params = o.params();
        params.seed = o.seed + i;
        ss::RunReport r;
        if (ss::is_sampling(algo)) {
            if (!inst.has_depths())
                inst = ss::with_computed_depths(std::move(inst));
            params.n = inst.n();
            r = ss::run_sampling(algo, ss::MaterializedAccess(inst.jobs), params);
        } else {
            if (algo == ss::Algorithm::stream3 || algo == ss::Algorithm::stream4)
                params.n = params.n.value_or(inst.n());
            if ((algo == ss::Algorithm::stream1 || algo == ss::Algorithm::stream3) && !inst.has_depths())
                inst = ss::with_computed_depths(std::move(inst));
            ss::InstanceEventSource src(inst);
            r = ss::run_streaming(algo, src, params);
        }
        return Row{params.seed, r.A, reference_makespan(inst, params.m), r.samples_drawn, r.sketch_nodes};
    });

    Sink sink(o.out);
    auto& out = sink.stream();
    out << "seed,A,C*_or_bound,ratio,samples,sketch_nodes\n";
    for (const auto& row : rows) {
        const double ratio = row.reference > 0 ? row.A / static_cast<double>(row.reference) : 0.0;
        out << row.seed << ',' << json(row.A).dump() << ',' << row.reference << ',' << json(ratio).dump() << ','
            << row.samples << ',' << row.nodes << '\n';
    }
    return ok;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Sketch-based makespan approximation for precedence-constrained scheduling", "schedsketch"};
    app.require_subcommand(1);
    // "-h" would clash with the --h depth flag.
    app.set_help_flag("--help", "print help");

    Common common;
    std::vector<std::pair<CLI::App*, ss::Algorithm>> algos;
    for (auto algo : {ss::Algorithm::stream1, ss::Algorithm::stream2, ss::Algorithm::stream3, ss::Algorithm::stream4,
                      ss::Algorithm::sample1, ss::Algorithm::sample2}) {
        auto* cmd = app.add_subcommand(std::string(ss::algorithm_name(algo)),
                                       ss::is_sampling(algo) ? "run a sampling scheme" : "run a streaming scheme");
        add_param_flags(cmd, common);
        cmd->add_option("--in", common.in, "instance file or gen-spec")->required();
        cmd->add_option("--out", common.out, "result file (default stdout)");
        cmd->add_option("--format", common.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
        if (ss::is_sampling(algo))
            cmd->add_option("--trials", common.trials, "independent trials with seeds seed, seed+1, ...");
        algos.push_back({cmd, algo});
    }

    ScheduleOpts sched;
    auto* schedule = app.add_subcommand("schedule", "build and validate a schedule from a schedule sketch");
    schedule->add_option("--in", sched.in, "instance file or gen-spec")->required();
    schedule->add_option("--sks", sched.sks, "result file from a stream or sample run")->required();
    schedule->add_option("--m", sched.m, "machines (default: from the result file)");
    schedule->add_option("--out", sched.out, "schedule CSV (default stdout)");
    schedule->add_option("--report", sched.report, "validation report JSON");

    OracleOpts oracle;
    std::string oracle_kind;
    auto* oracle_cmd = app.add_subcommand("oracle", "exact or list-scheduling makespan");
    oracle_cmd->add_option("kind", oracle_kind, "exact or list")->required()->check(CLI::IsMember({"exact", "list"}));
    oracle_cmd->add_option("--in", oracle.in, "instance file or gen-spec")->required();
    oracle_cmd->add_option("--m", oracle.m, "machines")->capture_default_str();
    oracle_cmd->add_option("--out", oracle.out, "schedule CSV (list only)");
    oracle_cmd->add_option("--format", oracle.format, "text or json")->check(CLI::IsMember({"text", "json"}));

    GenOpts g;
    auto* gen = app.add_subcommand("gen", "write a generated instance");
    gen->add_option("--family", g.family, "chain, uniform, layered, alpha-mixed or random-dag");
    gen->add_option("--spec", g.spec, "gen-spec string instead of --family and its flags");
    gen->add_option("--m", g.m, "chain: machines");
    gen->add_option("--q", g.q, "chain: chains per machine");
    gen->add_option("--h", g.h, "depth / levels");
    gen->add_option("--n", g.n, "number of jobs");
    gen->add_option("--c", g.c, "processing-time ratio bound");
    gen->add_option("--alpha", g.alpha, "alpha-mixed: fraction of big jobs");
    gen->add_option("--pbig", g.p_big, "alpha-mixed: largest processing time");
    gen->add_option("--small-max", g.small_max, "alpha-mixed: largest small processing time");
    gen->add_option("--plo", g.p_lo, "uniform: smallest processing time");
    gen->add_option("--phi", g.p_hi, "uniform: largest processing time");
    gen->add_option("--density", g.density, "random-dag: extra arc probability");
    gen->add_option("--width", g.width, "layered: jobs per layer");
    gen->add_option("--seed", g.seed, "random seed");
    gen->add_option("--out", g.out, "instance file (default stdout)");
    gen->add_option("--meta", g.meta, "metadata sidecar (default <out>.meta.json)");
    gen->get_option("--family")->excludes(gen->get_option("--spec"));

    BenchOpts bench;
    Common bench_common;
    auto* bench_cmd = app.add_subcommand("bench", "repeat a scheme over seeds and tabulate ratios");
    bench_cmd->add_option("--algo", bench.algo, "stream1..stream4, sample1, sample2")->capture_default_str();
    add_param_flags(bench_cmd, bench_common);
    bench_cmd->add_option("--in", bench_common.in, "instance file or gen-spec")->required();
    bench_cmd->add_option("--out", bench_common.out, "CSV output (default stdout)");
    bench_cmd->add_option("--trials", bench_common.trials, "trials (gen-spec seeds and algorithm seeds advance per trial)");
    bench_cmd->add_option("--format", bench_common.format, "csv")->check(CLI::IsMember({"csv"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? ok : arg_error;
    }

    try {
        for (const auto& [cmd, algo] : algos) {
            if (cmd->parsed())
                return ss::is_sampling(algo) ? run_sample(algo, common) : run_stream(algo, common);
        }
        if (schedule->parsed())
            return run_schedule(sched);
        if (oracle_cmd->parsed())
            return run_oracle(oracle_kind, oracle);
        if (gen->parsed())
            return run_gen(g);
        if (bench_cmd->parsed())
            return run_bench(bench, bench_common);
    } catch (const ss::param_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return arg_error;
    } catch (const ss::sketch_infeasible& e) {
        std::cerr << "sketch infeasible: " << e.what() << '\n';
        return infeasible;
    } catch (const ss::error& e) {
        std::cerr << "input error: " << e.what() << '\n';
        return input_violation;
    }
    return arg_error;
}
