// Command-line front end: model checking, inference, randomized
// verification of the inversion-composition result, lens-law probes, and
// model export.
//
// Exit codes: 0 success; 1 grammar/name errors in a model file;
// 2 validation errors (bad masses, shapes, labels); 3 an observation
// with zero predicted mass.  `verify` and `laws` exit 1 when a law that
// must hold fails.

#include <CLI11.hpp>

#include <blens/dsl.hpp>
#include <blens/harness.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

namespace {

using blens::Json;
using blens::RunConfig;

struct Options {
    RunConfig config;
    int jobs = 1;
    std::string file;
    int query = 0;
    bool corrupt_inversion = false;
    bool deterministic = false;
};

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw blens::Error("cannot open \"" + path + "\"");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

template <class T>
std::string dist_text(const blens::Dist<T>& d) {
    std::string out = "{";
    bool first = true;
    for (const auto& [i, m] : d.entries()) {
        if (!first) out += ", ";
        first = false;
        out += d.space().label(i) + ": " + blens::scalar_traits<T>::to_text(m);
    }
    return out + "}";
}

void print_law_line(const Json& rep, const std::string& name) {
    const Json& j = rep.at(name);
    std::cout << "laws: " << name << " trials " << j.at("trials").get<int>() << ", passed "
              << j.at("passed").get<int>() << "\n";
}

void print_verify_text(const Json& r) {
    const Json& th = r.at("theorem");
    std::cout << "verify: theorem trials " << th.at("trials").get<int>() << ", passed "
              << th.at("passed").get<int>() << ", failed " << th.at("failed").get<int>()
              << ", max gap " << th.at("max_gap").dump() << "\n";
    const Json& br = r.at("bayes_relation");
    std::cout << "verify: bayes relation checked " << br.at("checked").get<long>()
              << ", passed " << br.at("passed").get<long>() << "\n";
    const Json& dr = r.at("density_route");
    std::cout << "verify: density route trials " << dr.at("trials").get<int>()
              << ", passed " << dr.at("passed").get<int>() << ", effect identity "
              << dr.at("effect_identity_passed").get<int>() << ", max gap "
              << dr.at("max_gap").dump() << "\n";
    if (!r.at("witnesses").empty())
        std::cout << "verify: first witness " << r.at("witnesses")[0].dump() << "\n";
}

void print_laws_text(const Json& r) {
    std::cout << "laws: generators " << r.at("generators").get<std::string>() << "\n";
    print_law_line(r, "get_put");
    print_law_line(r, "put_get_at_prediction");
    const Json& pr = r.at("put_get_random");
    std::cout << "laws: put_get at random observations violated "
              << pr.at("violations").get<int>() << "/" << pr.at("trials").get<int>()
              << " (expected; witnesses recorded)\n";
    const Json& pp = r.at("put_put");
    std::cout << "laws: put_put counterexample "
              << (pp.at("found").get<bool>()
                      ? "found at trial " + std::to_string(pp.at("first_found_trial").get<int>())
                      : "not found")
              << "\n";
}

// ----------------------------------------------------------- commands

template <class T>
int cmd_check(const Options& opt) {
    std::string src = slurp(opt.file);
    blens::dsl::ModelAst ast = blens::dsl::parse_model(src);
    blens::dsl::Model<T> model = blens::dsl::validate_model<T>(ast);
    std::size_t decls = ast.statements.size() - model.queries.size();
    if (opt.config.format == blens::Format::json) {
        std::cout << Json{{"command", "check"},
                          {"file", opt.file},
                          {"declarations", decls},
                          {"queries", model.queries.size()},
                          {"ok", true}}
                         .dump(2)
                  << "\n";
    } else {
        std::cout << "check: " << opt.file << ": " << decls << " declarations, "
                  << model.queries.size() << " queries, ok\n";
    }
    return 0;
}

template <class T>
int cmd_infer(const Options& opt) {
    std::string src = slurp(opt.file);
    blens::dsl::Model<T> model =
        blens::dsl::validate_model<T>(blens::dsl::parse_model(src));
    if (model.queries.empty()) throw blens::Error("model has no queries");
    if (opt.query < 0 || static_cast<std::size_t>(opt.query) >= model.queries.size())
        throw blens::Error("no query #" + std::to_string(opt.query) + " (model has " +
                           std::to_string(model.queries.size()) + ")");
    const auto& q = model.queries[static_cast<std::size_t>(opt.query)];
    T eps = blens::eps_from_config<T>(opt.config);
    blens::dsl::QueryResult<T> res = blens::dsl::run_query<T>(q, eps);
    if (opt.config.format == blens::Format::json) {
        std::cout << res.payload.dump(2) << "\n";
    } else if (res.dist) {
        const char* label = res.kind == blens::dsl::QueryKind::infer ? "posterior" : "prediction";
        std::cout << label << " on " << res.dist->space().name() << ": "
                  << dist_text(*res.dist) << "\n";
    } else if (res.kind == blens::dsl::QueryKind::verify) {
        const Json& pay = res.payload;
        std::cout << "verify " << pay.at("pipeline").get<std::string>() << ": "
                  << (pay.at("holds").get<bool>() ? "holds" : "FAILS") << " over "
                  << pay.at("splits").size() << " splits\n";
        return pay.at("holds").get<bool>() ? 0 : 1;
    } else {
        std::cout << res.payload.dump(2) << "\n";
    }
    return 0;
}

template <class T>
int cmd_verify(const Options& opt) {
    Json report = blens::run_verify<T>(opt.config, opt.jobs, opt.corrupt_inversion);
    if (opt.config.format == blens::Format::json)
        std::cout << report.dump(2) << "\n";
    else
        print_verify_text(report);
    if (!blens::report_passed(report)) {
        if (!report.at("witnesses").empty() && opt.config.format != blens::Format::json)
            std::cerr << "verify failed; first witness:\n"
                      << report.at("witnesses")[0].dump(2) << "\n";
        return 1;
    }
    return 0;
}

template <class T>
int cmd_laws(const Options& opt) {
    if (opt.file.empty()) {
        Json report = blens::run_laws<T>(opt.config, opt.jobs, opt.deterministic);
        if (opt.config.format == blens::Format::json)
            std::cout << report.dump(2) << "\n";
        else
            print_laws_text(report);
        return blens::report_passed(report) ? 0 : 1;
    }
    std::string src = slurp(opt.file);
    blens::dsl::Model<T> model =
        blens::dsl::validate_model<T>(blens::dsl::parse_model(src));
    T eps = blens::eps_from_config<T>(opt.config);
    bool all_ok = true;
    Json reports = Json::array();
    for (const auto& q : model.queries) {
        if (q.kind != blens::dsl::QueryKind::laws) continue;
        blens::dsl::QueryResult<T> res = blens::dsl::run_query<T>(q, eps);
        const Json& pay = res.payload;
        all_ok = all_ok && pay.at("get_put").at("holds").get<bool>() &&
                 pay.at("put_get_at_prediction").at("holds").get<bool>();
        reports.push_back(pay);
    }
    if (reports.empty()) throw blens::Error("model has no laws queries");
    if (opt.config.format == blens::Format::json)
        std::cout << reports.dump(2) << "\n";
    else
        for (const auto& r : reports)
            std::cout << "laws " << r.at("pipeline").get<std::string>() << ": get_put "
                      << (r.at("get_put").at("holds").get<bool>() ? "holds" : "FAILS")
                      << ", put_get at prediction "
                      << (r.at("put_get_at_prediction").at("holds").get<bool>() ? "holds"
                                                                                : "FAILS")
                      << ", put_put counterexample "
                      << (r.at("put_put").at("holds").get<bool>() ? "not found" : "found")
                      << "\n";
    return all_ok ? 0 : 1;
}

template <class T>
int cmd_export(const Options& opt) {
    std::string src = slurp(opt.file);
    blens::dsl::ModelAst ast = blens::dsl::parse_model(src);
    blens::dsl::Model<T> model = blens::dsl::validate_model<T>(ast);
    if (opt.config.format == blens::Format::json)
        std::cout << blens::dsl::model_to_json(model).dump(2) << "\n";
    else
        std::cout << blens::dsl::print_model(ast);
    return 0;
}

template <class T>
int dispatch(const std::string& cmd, const Options& opt) {
    if (cmd == "check") return cmd_check<T>(opt);
    if (cmd == "infer") return cmd_infer<T>(opt);
    if (cmd == "verify") return cmd_verify<T>(opt);
    if (cmd == "laws") return cmd_laws<T>(opt);
    if (cmd == "export") return cmd_export<T>(opt);
    throw blens::Error("unknown command " + cmd);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"exact Bayesian inversion over finite stochastic channels"};
    app.require_subcommand(1);

    Options opt;
    std::string numeric = "rational", format = "text";
    app.add_option("--seed,-s", opt.config.seed, "seed for randomized runs")
        ->envname("BLENS_SEED");
    app.add_option("--trials,-n", opt.config.trials, "number of randomized trials");
    app.add_option("--max-dim", opt.config.max_dim, "largest space size drawn (2..16)");
    app.add_option("--numeric", numeric, "numeric mode: rational | float")
        ->check(CLI::IsMember({"rational", "float"}));
    app.add_option("--tolerance", opt.config.tolerance, "comparison tolerance (float mode)");
    app.add_option("--format", format, "output format: text | json")
        ->check(CLI::IsMember({"text", "json"}));
    app.add_option("--jobs,-j", opt.jobs, "worker threads (execution detail; not in reports)");

    CLI::App* check = app.add_subcommand("check", "parse and validate a model file");
    check->add_option("file", opt.file, "model file")->required();

    CLI::App* infer = app.add_subcommand("infer", "run a query from a model file");
    infer->add_option("file", opt.file, "model file")->required();
    infer->add_option("--query,-q", opt.query, "query index (0-based, default 0)");

    CLI::App* verify =
        app.add_subcommand("verify", "randomized verification of inversion composition");
    verify->add_flag("--corrupt-inversion", opt.corrupt_inversion,
                     "negative control: perturb one posterior row per trial")
        ->group("");  // hidden

    CLI::App* laws = app.add_subcommand("laws", "randomized (or model-driven) lens-law checks");
    laws->add_option("file", opt.file, "model file (optional; runs its laws queries)");
    laws->add_flag("--deterministic", opt.deterministic,
                   "draw deterministic (function) channels instead of stochastic ones");

    CLI::App* exp = app.add_subcommand("export", "export a validated model");
    exp->add_option("file", opt.file, "model file")->required();

    CLI11_PARSE(app, argc, argv);

    opt.config.numeric = numeric == "float" ? blens::Numeric::floating : blens::Numeric::rational;
    opt.config.format = format == "json" ? blens::Format::json : blens::Format::text;

    std::string cmd;
    for (const auto* sub : {check, infer, verify, laws, exp})
        if (sub->parsed()) cmd = sub->get_name();

    try {
        opt.config.validate();
        if (opt.jobs < 1) throw std::invalid_argument("--jobs must be >= 1");
        if (opt.config.numeric == blens::Numeric::floating)
            return dispatch<double>(cmd, opt);
        return dispatch<blens::Rational>(cmd, opt);
    } catch (const blens::PositionedError& e) {
        std::cerr << "error (" << blens::at_pos(e.pos) << "): " << e.what() << "\n";
        return 1;
    } catch (const blens::EmptyPushforward& e) {
        std::cerr << "error: " << e.what() << "\n";
        if (!e.detail.empty()) std::cerr << "predicted: " << e.detail << "\n";
        return 3;
    } catch (const blens::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
