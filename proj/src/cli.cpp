#include "tsd/cli.hpp"

#include "tsd/als.hpp"
#include "tsd/io.hpp"
#include "tsd/pam.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

namespace tsd::cli {

namespace {

using nlohmann::json;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RankArgs {
    std::optional<std::size_t> rank;
    std::optional<std::size_t> ring;
    std::string profile_path;

    void add_to(CLI::App& cmd) {
        auto* r = cmd.add_option("--rank", rank, "uniform factor rank R");
        cmd.add_option("--ring", ring, "uniform ring rank L (defaults to R)")->needs(r);
        cmd.add_option("--profile", profile_path, "JSON rank profile {R1, R2, L}")->excludes(r);
    }

    RankProfile resolve(std::size_t order) const {
        if (!profile_path.empty()) {
            RankProfile p = io::read_profile(profile_path);
            if (p.order() != order) {
                throw std::invalid_argument("rank profile of order " + std::to_string(p.order()) +
                                            " does not match tensor order " +
                                            std::to_string(order));
            }
            return p;
        }
        if (!rank) throw UsageError("one of --rank or --profile is required");
        RankProfile p = RankProfile::uniform(order, *rank, ring.value_or(*rank));
        p.validate();
        return p;
    }

    json config(const RankProfile& p) const {
        json j{{"R1", p.left}, {"R2", p.right}, {"L", p.ring}};
        if (!profile_path.empty()) j["source"] = profile_path;
        return j;
    }
};

void emit(const json& report, const std::string& path, std::ostream& out) {
    if (path.empty()) {
        out << report.dump(2) << '\n';
        return;
    }
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path + " for writing");
    os << report.dump(2) << '\n';
}

json metrics_json(const CompletionMetrics& m) {
    return json{{"rse_missing", m.rse_missing}, {"mpsnr", m.mpsnr}, {"psnr", m.psnr}};
}

const char* kind_of(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open " + path + " for reading");
    char magic[4] = {0, 0, 0, 0};
    is.read(magic, 4);
    const std::string m(magic, 4);
    if (m == "TSR1") return "tensor";
    if (m == "TSM1") return "mask";
    if (m == "TSN1") return "network";
    throw io::FormatError(path + ": unrecognised magic field");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Tensor Star decomposition and completion"};
    app.require_subcommand(1);

    // synth
    auto* synth = app.add_subcommand("synth", "write a tensor reconstructed from a random network");
    std::vector<std::size_t> synth_shape;
    RankArgs synth_ranks;
    std::uint64_t synth_seed = 0;
    double synth_scale = 1.0;
    std::string synth_out, synth_net, synth_json;
    synth->add_option("--shape", synth_shape, "mode sizes, comma separated")
        ->required()
        ->delimiter(',');
    synth_ranks.add_to(*synth);
    synth->add_option("--seed", synth_seed);
    synth->add_option("--scale", synth_scale, "standard deviation of network entries");
    synth->add_option("--out", synth_out, "tensor file")->required();
    synth->add_option("--net", synth_net, "network sidecar (default <out>.net)");
    synth->add_option("--json", synth_json, "report path (default stdout)");

    // mask
    auto* mask_cmd = app.add_subcommand("mask", "write a uniformly random observation mask");
    std::vector<std::size_t> mask_shape;
    double mask_fraction = 0.0;
    std::uint64_t mask_seed = 0;
    std::string mask_out, mask_json;
    mask_cmd->add_option("--shape", mask_shape)->required()->delimiter(',');
    mask_cmd->add_option("--fraction", mask_fraction, "observed fraction in (0, 1]")->required();
    mask_cmd->add_option("--seed", mask_seed);
    mask_cmd->add_option("--out", mask_out)->required();
    mask_cmd->add_option("--json", mask_json);

    // decompose
    auto* dec = app.add_subcommand("decompose", "fit a network by alternating least squares");
    std::string dec_in, dec_out, dec_json;
    RankArgs dec_ranks;
    AlsOptions dec_opts;
    dec->add_option("input", dec_in, "tensor file")->required();
    dec_ranks.add_to(*dec);
    dec->add_option("--tol", dec_opts.rel_tol, "relative error target");
    dec->add_option("--max-iter", dec_opts.max_sweeps, "sweep cap");
    dec->add_option("--seed", dec_opts.seed);
    dec->add_option("--svd-cutoff", dec_opts.svd_cutoff);
    dec->add_option("--out", dec_out, "network file");
    dec->add_option("--json", dec_json);

    // complete
    auto* comp = app.add_subcommand("complete", "fill missing entries by proximal minimization");
    std::string comp_in, comp_mask, comp_out, comp_truth, comp_json, comp_net;
    RankArgs comp_ranks;
    PamOptions comp_opts;
    comp->add_option("input", comp_in, "tensor file")->required();
    comp->add_option("--mask", comp_mask, "mask file")->required();
    comp_ranks.add_to(*comp);
    comp->add_option("--rho", comp_opts.rho);
    comp->add_option("--tol", comp_opts.tol);
    comp->add_option("--max-iter", comp_opts.max_iter);
    comp->add_option("--seed", comp_opts.seed);
    comp->add_option("--out", comp_out, "recovered tensor file");
    comp->add_option("--net", comp_net, "fitted network file");
    comp->add_option("--truth", comp_truth, "ground-truth tensor for metrics");
    comp->add_option("--json", comp_json);

    // metrics
    auto* met = app.add_subcommand("metrics", "score a tensor against ground truth");
    std::string met_in, met_truth, met_mask, met_json;
    met->add_option("input", met_in)->required();
    met->add_option("--truth", met_truth)->required();
    met->add_option("--mask", met_mask, "entries excluded from RSE (default none)");
    met->add_option("--json", met_json);

    // inspect
    auto* insp = app.add_subcommand("inspect", "describe a tensor, mask or network file");
    std::string insp_in;
    bool insp_csv = false;
    insp->add_option("input", insp_in)->required();
    insp->add_flag("--dump-csv", insp_csv, "print every entry of a tensor file");

    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kExitError;
    }

    try {
        if (synth->parsed()) {
            const Shape shape(synth_shape.begin(), synth_shape.end());
            const RankProfile p = synth_ranks.resolve(shape.size());
            std::mt19937_64 rng(synth_seed);
            const TSNetwork net = random_network(shape, p, rng, synth_scale);
            const DenseTensor x = reconstruct(net);
            const std::string net_path = synth_net.empty() ? synth_out + ".net" : synth_net;
            io::write_tensor(synth_out, x);
            io::write_network(net_path, net);
            emit(json{{"command", "synth"},
                      {"config",
                       {{"shape", shape},
                        {"profile", synth_ranks.config(p)},
                        {"seed", synth_seed},
                        {"scale", synth_scale},
                        {"out", synth_out},
                        {"net", net_path}}},
                      {"result", {{"param_count", param_count(net)}, {"norm", frobenius_norm(x)}}}},
                 synth_json, out);
            return kExitOk;
        }
        if (mask_cmd->parsed()) {
            const Shape shape(mask_shape.begin(), mask_shape.end());
            const ObservationMask m = ObservationMask::random(shape, mask_fraction, mask_seed);
            io::write_mask(mask_out, m);
            emit(json{{"command", "mask"},
                      {"config",
                       {{"shape", shape},
                        {"fraction", mask_fraction},
                        {"seed", mask_seed},
                        {"out", mask_out}}},
                      {"result", {{"count", m.count()}, {"total", m.total()}}}},
                 mask_json, out);
            return kExitOk;
        }
        if (dec->parsed()) {
            const DenseTensor x = io::read_tensor(dec_in);
            const RankProfile p = dec_ranks.resolve(x.order());
            const AlsFit fit = als_fit(x, p, dec_opts);
            if (!dec_out.empty()) io::write_network(dec_out, fit.network);
            emit(json{{"command", "decompose"},
                      {"config",
                       {{"input", dec_in},
                        {"profile", dec_ranks.config(p)},
                        {"tol", dec_opts.rel_tol},
                        {"max_iter", dec_opts.max_sweeps},
                        {"seed", dec_opts.seed},
                        {"svd_cutoff", dec_opts.svd_cutoff},
                        {"init_scale", dec_opts.init_scale},
                        {"out", dec_out}}},
                      {"result",
                       {{"final_error", fit.report.final_error},
                        {"sweeps", fit.report.sweeps_run},
                        {"converged", fit.report.converged},
                        {"param_count", param_count(fit.network)},
                        {"sweep_errors", fit.report.sweep_errors}}}},
                 dec_json, out);
            return fit.report.converged ? kExitOk : kExitNotConverged;
        }
        if (comp->parsed()) {
            const DenseTensor h = io::read_tensor(comp_in);
            const ObservationMask m = io::read_mask(comp_mask);
            comp_opts.ranks = comp_ranks.resolve(h.order());
            std::optional<DenseTensor> truth;
            if (!comp_truth.empty()) truth = io::read_tensor(comp_truth);
            const CompletionResult res =
                pam_complete(h, m, comp_opts, truth ? &*truth : nullptr);
            if (!comp_out.empty()) io::write_tensor(comp_out, res.recovered);
            if (!comp_net.empty()) io::write_network(comp_net, res.network);
            const Assembly used = resolve_assembly(comp_opts.assembly, comp_opts.ranks, h.shape());
            json result{{"iterations", res.iterations},
                        {"converged", res.converged},
                        {"objective", res.objective.back()},
                        {"relative_change",
                         res.relative_change.empty() ? 0.0 : res.relative_change.back()},
                        {"observed", m.count()},
                        {"param_count", param_count(res.network)}};
            if (res.metrics) result["metrics"] = metrics_json(*res.metrics);
            emit(json{{"command", "complete"},
                      {"config",
                       {{"input", comp_in},
                        {"mask", comp_mask},
                        {"profile", comp_ranks.config(comp_opts.ranks)},
                        {"rho", comp_opts.rho},
                        {"tol", comp_opts.tol},
                        {"max_iter", comp_opts.max_iter},
                        {"seed", comp_opts.seed},
                        {"init_scale", comp_opts.init_scale},
                        {"assembly", used == Assembly::normal_equations ? "normal_equations"
                                                                        : "materialized"},
                        {"truth", comp_truth},
                        {"out", comp_out},
                        {"net", comp_net}}},
                      {"result", result}},
                 comp_json, out);
            return res.converged ? kExitOk : kExitNotConverged;
        }
        if (met->parsed()) {
            const DenseTensor x = io::read_tensor(met_in);
            const DenseTensor t = io::read_tensor(met_truth);
            const ObservationMask m =
                met_mask.empty() ? ObservationMask::none(t.shape()) : io::read_mask(met_mask);
            emit(json{{"command", "metrics"},
                      {"config", {{"input", met_in}, {"truth", met_truth}, {"mask", met_mask}}},
                      {"result", metrics_json(completion_metrics(x, t, m))}},
                 met_json, out);
            return kExitOk;
        }
        if (insp->parsed()) {
            const std::string kind = kind_of(insp_in);
            json info{{"file", insp_in}, {"kind", kind}};
            if (kind == "tensor") {
                const DenseTensor t = io::read_tensor(insp_in);
                if (insp_csv) {
                    io::dump_csv(out, t);
                    return kExitOk;
                }
                info["shape"] = t.shape();
                info["norm"] = frobenius_norm(t);
            } else if (kind == "mask") {
                const ObservationMask m = io::read_mask(insp_in);
                info["shape"] = m.shape();
                info["count"] = m.count();
            } else {
                const TSNetwork net = io::read_network(insp_in);
                info["shape"] = net.mode_sizes;
                info["profile"] = json::parse(io::profile_to_json(net.profile));
                info["param_count"] = param_count(net);
            }
            if (insp_csv && kind != "tensor") throw UsageError("--dump-csv needs a tensor file");
            out << info.dump(2) << '\n';
            return kExitOk;
        }
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitError;
    }
    return kExitError;
}

}  // namespace tsd::cli
