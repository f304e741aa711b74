// Command-line front end: file-level wrappers over the codec, the bound
// theory, and the forecasting pipeline. Every run is reproducible from its
// config + seed; outputs are stamped with the config digest.
#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "mvts/forecaster.hpp"
#include "mvts/pipeline.hpp"
#include "mvts/sme.hpp"

using json = nlohmann::json;
namespace fs = std::filesystem;
using namespace mvts;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitInternal = 4;

std::uint64_t fnv1a64(std::string_view text) {
    std::uint64_t hash = 0xcbf29ce484222325ull;
    for (unsigned char ch : text) {
        hash ^= ch;
        hash *= 0x100000001b3ull;
    }
    return hash;
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::string fixed6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

// ---------------------------------------------------------------------------
// Run configuration
// ---------------------------------------------------------------------------

struct PredictorConfig {
    std::string kind = "reference";  // or "persistence"
    ReferenceNetConfig net;
};

struct RunConfig {
    json dataset;  // {"path": ...} or {"synthetic": {...}}
    bool global_zscore = true;
    int h = 0;
    std::optional<double> ms;  // empty -> solve for the optimal scale
    WindowSpec window{1, 1, 1};
    double split_train = 0.7, split_val = 0.1, split_test = 0.2;
    bool channel_independent = true;
    PredictorConfig predictor;
    std::uint64_t seed = 0;
    std::string output_dir;

    json canonical;            // resolved config, overrides applied
    std::uint64_t digest = 0;  // fnv1a of the canonical dump

    CodecParams codec() const {
        return CodecParams(h, ms ? *ms : solve_optimal_ms(h));
    }
};

struct Overrides {
    std::optional<int> h;
    std::optional<double> ms;
    std::optional<int> epochs;
    std::optional<std::uint64_t> seed;
    std::optional<int> lookback, horizon;
    std::optional<std::string> out_dir;
};

json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("config: cannot open '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ValidationError("config: '" + path + "' is not valid JSON: " + e.what());
    }
    return j;
}

void check_keys(const json& j, const char* where, std::initializer_list<const char*> allowed) {
    if (!j.is_object()) throw ValidationError(std::string("config: ") + where + " must be an object");
    for (const auto& [key, value] : j.items()) {
        bool known = false;
        for (const char* a : allowed) known = known || key == a;
        if (!known)
            throw ValidationError(std::string("config: unknown key '") + key + "' in " + where);
    }
}

RunConfig parse_config(const std::string& path, const Overrides& ov) {
    json j = load_json(path);
    if (ov.h) j["codec"]["h"] = *ov.h;
    if (ov.ms) j["codec"]["ms"] = *ov.ms;
    if (ov.epochs) j["predictor"]["epochs"] = *ov.epochs;
    if (ov.seed) j["seed"] = *ov.seed;
    if (ov.lookback) j["window"]["lookback"] = *ov.lookback;
    if (ov.horizon) j["window"]["horizon"] = *ov.horizon;
    if (ov.out_dir) j["output_dir"] = *ov.out_dir;

    check_keys(j, "the top level",
               {"dataset", "global_zscore", "codec", "window", "split", "channel_independent",
                "predictor", "seed", "output_dir"});
    check_keys(j.value("dataset", json::object()), "dataset", {"path", "synthetic"});
    if (j.contains("dataset") && j["dataset"].contains("synthetic"))
        check_keys(j["dataset"]["synthetic"], "dataset.synthetic",
                   {"kind", "t", "channels", "period", "noise", "seed"});
    check_keys(j.value("codec", json::object()), "codec", {"h", "ms"});
    check_keys(j.value("window", json::object()), "window", {"lookback", "horizon", "stride"});
    check_keys(j.value("split", json::object()), "split", {"train", "val", "test"});
    check_keys(j.value("predictor", json::object()), "predictor",
               {"kind", "hidden", "epochs", "learning_rate", "batch_size", "seed", "init_scale"});

    RunConfig cfg;
    try {
        cfg.dataset = j.at("dataset");
        cfg.global_zscore = j.value("global_zscore", true);
        cfg.h = j.at("codec").at("h").get<int>();
        const json& ms = j.at("codec").at("ms");
        if (ms.is_string()) {
            if (ms.get<std::string>() != "auto")
                throw ValidationError("config: codec.ms must be a number or \"auto\"");
        } else {
            cfg.ms = ms.get<double>();
        }
        const json& w = j.at("window");
        cfg.window = WindowSpec(w.at("lookback").get<int>(), w.at("horizon").get<int>(),
                                w.value("stride", 1));
        if (j.contains("split")) {
            cfg.split_train = j["split"].value("train", 0.7);
            cfg.split_val = j["split"].value("val", 0.1);
            cfg.split_test = j["split"].value("test", 0.2);
        }
        cfg.channel_independent = j.value("channel_independent", true);
        if (j.contains("predictor")) {
            const json& p = j["predictor"];
            cfg.predictor.kind = p.value("kind", "reference");
            cfg.predictor.net.hidden = p.value("hidden", 128);
            cfg.predictor.net.learning_rate = p.value("learning_rate", 0.05);
            cfg.predictor.net.epochs = p.value("epochs", 10);
            cfg.predictor.net.batch_size = p.value("batch_size", 32);
            cfg.predictor.net.seed = p.value("seed", 0ull);
            cfg.predictor.net.init_scale = p.value("init_scale", 1.0);
        }
        cfg.predictor.net.horizon = cfg.window.horizon;
        cfg.seed = j.value("seed", 0ull);
        cfg.output_dir = j.value("output_dir", "");
    } catch (const json::exception& e) {
        throw ValidationError(std::string("config: ") + e.what());
    }
    if (cfg.predictor.kind != "reference" && cfg.predictor.kind != "persistence")
        throw ValidationError("config: predictor.kind must be 'reference' or 'persistence'");
    if (cfg.h < 2) throw ValidationError("config: codec.h must be >= 2");

    cfg.canonical = j;
    // The digest covers everything that affects the computation; where the
    // outputs land does not.
    json for_digest = j;
    for_digest.erase("output_dir");
    cfg.digest = fnv1a64(for_digest.dump());
    return cfg;
}

fs::path resolve_output_dir(const RunConfig& cfg) {
    if (!cfg.output_dir.empty()) return cfg.output_dir;
    if (const char* env = std::getenv("MVTS_OUTPUT_DIR"); env && *env) return env;
    return ".";
}

Dataset load_dataset(const RunConfig& cfg) {
    if (cfg.dataset.contains("path"))
        return load_csv(cfg.dataset["path"].get<std::string>(), cfg.global_zscore);
    if (cfg.dataset.contains("synthetic")) {
        const json& s = cfg.dataset["synthetic"];
        if (s.value("kind", "sine") != "sine")
            throw ValidationError("config: only the 'sine' synthetic dataset is available");
        return synthetic_sine(s.value("t", 2000ll), s.value("channels", 1),
                              s.value("period", 96.0), s.value("noise", 0.1),
                              s.value("seed", 0ull), cfg.global_zscore);
    }
    throw ValidationError("config: dataset needs either 'path' or 'synthetic'");
}

std::ofstream open_output(const fs::path& path) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);  // binary: LF line endings everywhere
    if (!out) throw ValidationError("cannot write '" + path.string() + "'");
    return out;
}

void write_bytes(const fs::path& path, std::span<const std::uint8_t> bytes) {
    std::ofstream out = open_output(path);
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw ValidationError("write to '" + path.string() + "' failed");
}

// ---------------------------------------------------------------------------
// codec commands
// ---------------------------------------------------------------------------

// Digest of a file-level command's effective flags; config-driven commands
// digest their resolved config instead.
std::uint64_t flags_digest(const json& flags) { return fnv1a64(flags.dump()); }

void write_series_csv(const fs::path& path, const NumericSeries& s, std::uint64_t digest) {
    std::ofstream out = open_output(path);
    out << "# config " << hex64(digest) << "\n";
    for (int i = 0; i < s.channels(); ++i) out << (i ? "," : "") << "ch" << i;
    out << "\n";
    for (int k = 0; k < s.steps(); ++k) {
        for (int i = 0; i < s.channels(); ++i) out << (i ? "," : "") << fixed6(s.at(i, k));
        out << "\n";
    }
}

int cmd_encode(const std::string& input, const std::string& output, int h,
               std::optional<double> ms, bool zscore) {
    const CodecParams params(h, ms ? *ms : solve_optimal_ms(h));
    const Dataset d = load_csv(input, zscore);
    const BinaryVisionTensor v = encode(d.series, params);
    write_bytes(output, serialize(v));
    std::cout << "encoded " << d.series.channels() << "x" << d.series.steps() << " -> " << output
              << " (h=" << params.h << ", ms=" << fixed6(params.ms) << ")\n";
    return kExitOk;
}

int cmd_decode(const std::string& input, const std::string& output, double ms) {
    std::ifstream in(input, std::ios::binary);
    if (!in) throw ValidationError("cannot open '" + input + "'");
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    const BinaryVisionTensor v = deserialize(bytes);
    const NumericSeries s = decode(v, CodecParams(v.bins(), ms));
    write_series_csv(output, s,
                     flags_digest(json{{"cmd", "decode"}, {"input", input}, {"ms", ms}}));
    std::cout << "decoded " << s.channels() << "x" << s.steps() << " -> " << output << "\n";
    return kExitOk;
}

int cmd_render(const std::string& input, const std::string& output, int channel) {
    std::ifstream in(input, std::ios::binary);
    if (!in) throw ValidationError("cannot open '" + input + "'");
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    const BinaryVisionTensor v = deserialize(bytes);
    std::string pbm = render_pbm(v, channel);
    const std::uint64_t digest =
        flags_digest(json{{"cmd", "render"}, {"input", input}, {"channel", channel}});
    pbm.insert(3, "# config " + hex64(digest) + "\n");  // after the "P1\n" token
    std::ofstream out = open_output(output);
    out << pbm;
    std::cout << "rendered channel " << channel << " -> " << output << "\n";
    return kExitOk;
}

int cmd_gen_sine(long long t, int channels, double period, double noise, std::uint64_t seed,
                 const std::string& output) {
    const Dataset d = synthetic_sine(t, channels, period, noise, seed, false);
    const std::uint64_t digest = flags_digest(json{{"cmd", "gen-sine"},
                                                   {"t", t},
                                                   {"channels", channels},
                                                   {"period", period},
                                                   {"noise", noise},
                                                   {"seed", seed}});
    write_series_csv(output, d.series, digest);
    std::cout << "wrote " << channels << "x" << t << " sine -> " << output << "\n";
    return kExitOk;
}

// ---------------------------------------------------------------------------
// bound-theory commands
// ---------------------------------------------------------------------------

int cmd_solve_ms(int h, double tol) {
    std::cout << fixed6(solve_optimal_ms(h, tol)) << "\n";
    return kExitOk;
}

int cmd_bound(int h, double ms, long long ct, bool total) {
    const BoundQuery q(h, ms, !total, ct);
    std::cout << fixed6(sme_upper_bound(q)) << "\n";
    return kExitOk;
}

void write_table_file(const std::string& output, std::uint64_t digest, const std::string& body) {
    if (output.empty()) return;
    std::ofstream out = open_output(output);
    out << "# config " << hex64(digest) << "\n" << body;
}

int cmd_table1(const std::string& output) {
    const auto rows = optimal_ms_table(kReferenceResolutions);
    std::ostringstream os;
    os << "h,best_ms,bound\n";
    for (const auto& r : rows)
        os << r.h << ',' << fixed6(r.best_ms) << ',' << fixed6(r.bound) << "\n";
    write_table_file(output, flags_digest(json{{"cmd", "table1"}}), os.str());
    std::cout << os.str();
    return kExitOk;
}

int cmd_verify_sme(int h, double ms, long long n, std::uint64_t seed, int c, int t,
                   const std::string& output) {
    const MonteCarloReport r = monte_carlo_sme(CodecParams(h, ms), c, t, n, seed);
    std::ostringstream os;
    os << "h,ms,c,t,n,seed,empirical_mean,std_error,bound\n";
    os << h << ',' << fixed6(ms) << ',' << c << ',' << t << ',' << n << ',' << seed << ','
       << fixed6(r.mean) << ',' << fixed6(r.std_error) << ',' << fixed6(r.bound) << "\n";
    write_table_file(output,
                     flags_digest(json{{"cmd", "verify-sme"},
                                       {"h", h},
                                       {"ms", ms},
                                       {"n", n},
                                       {"seed", seed},
                                       {"c", c},
                                       {"t", t}}),
                     os.str());
    std::cout << os.str();
    if (r.mean - 3.0 * r.std_error > r.bound) {
        std::cerr << "error: empirical mean minus 3 standard errors exceeds the bound\n";
        return kExitNumeric;
    }
    return kExitOk;
}

int cmd_check_convergence(double ms, const std::vector<long long>& schedule,
                          const std::string& output) {
    const ConvergenceReport r = check_convergence(ms, schedule);
    std::ostringstream os;
    os << "h,bound\n";
    for (const auto& row : r.rows) os << row.h << ',' << fixed6(row.bound) << "\n";
    write_table_file(
        output,
        flags_digest(json{{"cmd", "check-convergence"}, {"ms", ms}, {"schedule", schedule}}),
        os.str());
    std::cout << os.str();
    std::cout << "h_limit," << fixed6(r.h_limit) << "\n";
    std::cout << "strictly_decreasing," << (r.strictly_decreasing ? 1 : 0) << "\n";
    return kExitOk;
}

// ---------------------------------------------------------------------------
// pipeline commands
// ---------------------------------------------------------------------------

struct RunContext {
    RunConfig cfg;
    Dataset data;
    SplitRanges splits;
    CodecParams params;

    explicit RunContext(RunConfig c)
        : cfg(std::move(c)), data(load_dataset(cfg)),
          splits(split_dataset(data, cfg.split_train, cfg.split_val, cfg.split_test, cfg.window)),
          params(cfg.codec()) {}
};

int cmd_train(const std::string& config_path, const Overrides& ov) {
    RunContext ctx{parse_config(config_path, ov)};
    if (ctx.cfg.predictor.kind != "reference")
        throw ValidationError("train: only the 'reference' predictor has trainable parameters");

    const WindowView view = make_windows(ctx.data, ctx.cfg.window, ctx.splits.train,
                                         ctx.cfg.channel_independent);
    ReferenceNet net(ctx.params.h, ctx.cfg.window.lookback, ctx.cfg.predictor.net);
    const TrainResult result = train(net, view, ctx.params, ctx.cfg.predictor.net);

    const fs::path dir = resolve_output_dir(ctx.cfg);
    fs::create_directories(dir);
    save_checkpoint((dir / "checkpoint.mvck").string(), net.parameters(), ctx.cfg.digest);
    std::ofstream curve = open_output(dir / "loss_curve.csv");
    curve << "# config " << hex64(ctx.cfg.digest) << "\n";
    curve << "epoch,loss\n";
    for (std::size_t e = 0; e < result.epoch_loss.size(); ++e)
        curve << e << ',' << fixed6(result.epoch_loss[e]) << "\n";

    std::cout << "trained " << view.size() << " windows for " << result.epoch_loss.size()
              << " epochs (h=" << ctx.params.h << ", ms=" << fixed6(ctx.params.ms) << ")\n"
              << "final loss " << fixed6(result.epoch_loss.back()) << "\n"
              << "checkpoint " << (dir / "checkpoint.mvck").string() << "\n";
    return kExitOk;
}

std::unique_ptr<Predictor> build_predictor(const RunContext& ctx,
                                           const std::string& checkpoint_path) {
    if (ctx.cfg.predictor.kind == "persistence") return std::make_unique<PersistencePredictor>();
    if (checkpoint_path.empty())
        throw ValidationError("the reference predictor needs --checkpoint");
    const Checkpoint ck = load_checkpoint(checkpoint_path);
    if (ck.config_digest != ctx.cfg.digest)
        throw ValidationError("checkpoint was produced by a different config (digest " +
                              hex64(ck.config_digest) + " vs " + hex64(ctx.cfg.digest) + ")");
    auto net = std::make_unique<ReferenceNet>(ctx.params.h, ctx.cfg.window.lookback,
                                              ctx.cfg.predictor.net);
    net->set_parameters(ck.theta);
    return net;
}

int cmd_predict(const std::string& config_path, const Overrides& ov,
                const std::string& checkpoint_path, const std::string& output) {
    RunContext ctx{parse_config(config_path, ov)};
    const std::unique_ptr<Predictor> model = build_predictor(ctx, checkpoint_path);
    const WindowView view = make_windows(ctx.data, ctx.cfg.window, ctx.splits.test,
                                         ctx.cfg.channel_independent);

    std::ofstream out = open_output(output);
    out << "# config " << hex64(ctx.cfg.digest) << "\n";
    out << "window_id,channel,step,value\n";
    for (std::size_t w = 0; w < view.size(); ++w) {
        const WindowPair pair = view.get(w);
        const int first_ch = pair.channel_id >= 0 ? pair.channel_id : 0;
        NumericSeries raw_x(pair.x.channels(), ctx.cfg.window.lookback);
        for (int i = 0; i < pair.x.channels(); ++i)
            for (int k = 0; k < ctx.cfg.window.lookback; ++k)
                raw_x.at(i, k) = ctx.data.series.at(first_ch + i, (int)(pair.position + k));
        const NumericSeries pred = predict(*model, raw_x, ctx.params, ctx.cfg.window.horizon);
        for (int i = 0; i < pred.channels(); ++i) {
            const int label = pair.channel_id >= 0 ? pair.channel_id : i;
            for (int k = 0; k < pred.steps(); ++k)
                out << w << ',' << label << ',' << k << ',' << fixed6(pred.at(i, k)) << "\n";
        }
    }
    std::cout << "wrote predictions for " << view.size() << " windows -> " << output << "\n";
    return kExitOk;
}

void write_eval_rows(std::ostream& out, const std::string& name, const EvalReport& r) {
    out << name << ",aggregate,," << r.count << ',' << fixed6(r.mse) << ',' << fixed6(r.mae)
        << "\n";
    for (std::size_t k = 0; k < r.horizon_mae.size(); ++k)
        out << name << ",horizon," << k << ',' << r.count << ',' << fixed6(r.horizon_mse[k])
            << ',' << fixed6(r.horizon_mae[k]) << "\n";
}

int cmd_eval(const std::string& config_path, const Overrides& ov,
             const std::string& checkpoint_path, const std::string& output) {
    RunContext ctx{parse_config(config_path, ov)};
    const WindowView view = make_windows(ctx.data, ctx.cfg.window, ctx.splits.test,
                                         ctx.cfg.channel_independent);

    const std::unique_ptr<Predictor> model = build_predictor(ctx, checkpoint_path);
    const EvalReport model_report = evaluate_windows(*model, ctx.data, view, ctx.params);
    const EvalReport base_report =
        evaluate_windows(PersistencePredictor(), ctx.data, view, ctx.params);
    const EvalReport floor_report = quantization_floor(ctx.data, view, ctx.params);

    std::ostringstream os;
    os << "# config " << hex64(ctx.cfg.digest) << "\n";
    os << "predictor,scope,step,windows,mse,mae\n";
    write_eval_rows(os, model->name(), model_report);
    write_eval_rows(os, "persistence", base_report);
    write_eval_rows(os, "floor", floor_report);
    if (!output.empty()) {
        std::ofstream out = open_output(output);
        out << os.str();
    }
    std::cout << os.str();
    return kExitOk;
}

int cmd_export_windows(const std::string& config_path, const Overrides& ov,
                       const std::string& split, const std::string& output) {
    RunContext ctx{parse_config(config_path, ov)};
    RowRange range;
    if (split == "train")
        range = ctx.splits.train;
    else if (split == "val")
        range = ctx.splits.val;
    else if (split == "test")
        range = ctx.splits.test;
    else
        throw ValidationError("export-windows: --split must be train, val, or test");
    const WindowView view =
        make_windows(ctx.data, ctx.cfg.window, range, ctx.cfg.channel_independent);
    std::ofstream out = open_output(output);
    out << "# config " << hex64(ctx.cfg.digest) << "\n";
    export_windows_csv(out, view);
    std::cout << "exported " << view.size() << " windows -> " << output << "\n";
    return kExitOk;
}

int cmd_sweep(const std::string& config_path, const Overrides& ov, const std::string& vary,
              const std::string& target, std::vector<double> grid, long long n,
              const std::string& output) {
    RunContext ctx{parse_config(config_path, ov)};
    if (vary != "ms" && vary != "h") throw ValidationError("sweep: --vary must be 'ms' or 'h'");
    if (target != "codec" && target != "model")
        throw ValidationError("sweep: --target must be 'codec' or 'model'");

    if (grid.empty()) {
        if (vary == "ms")
            for (double ms = 1.0; ms <= 4.501; ms += 0.25) grid.push_back(ms);
        else
            grid = {50, 100, 200, 400, 800};
    }

    std::vector<SweepPoint> points;
    if (target == "codec") {
        if (vary == "ms") {
            points = sweep_codec_ms(ctx.params.h, grid, n, ctx.cfg.seed);
        } else {
            std::vector<int> hs(grid.begin(), grid.end());
            points = sweep_codec_h(ctx.params.ms, hs, n, ctx.cfg.seed);
        }
    } else {
        const WindowView test_view = make_windows(ctx.data, ctx.cfg.window, ctx.splits.test,
                                                  ctx.cfg.channel_independent);
        for (double g : grid) {
            const int h = (vary == "h") ? static_cast<int>(g) : ctx.params.h;
            const CodecParams params(h, (vary == "ms") ? g : ctx.params.ms);
            std::unique_ptr<Predictor> model;
            if (ctx.cfg.predictor.kind == "persistence") {
                model = std::make_unique<PersistencePredictor>();
            } else {
                const WindowView train_view =
                    make_windows(ctx.data, ctx.cfg.window, ctx.splits.train,
                                 ctx.cfg.channel_independent);
                auto net = std::make_unique<ReferenceNet>(params.h, ctx.cfg.window.lookback,
                                                          ctx.cfg.predictor.net);
                train(*net, train_view, params, ctx.cfg.predictor.net);
                model = std::move(net);
            }
            const EvalReport r = evaluate_windows(*model, ctx.data, test_view, params);
            points.push_back({params.ms, params.h, r.mae});
        }
    }

    std::ostringstream os;
    os << "# config " << hex64(ctx.cfg.digest) << "\n";
    os << "ms,h,mae\n";
    for (const auto& p : points)
        os << fixed6(p.ms) << ',' << p.h << ',' << fixed6(p.mae) << "\n";
    if (!output.empty()) {
        std::ofstream out = open_output(output);
        out << os.str();
    }
    std::cout << os.str();
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"binary machine-vision time-series toolkit"};
    app.require_subcommand(1);
    // `--h` is a real option here, so help is long-form only.
    app.set_help_flag("--help", "print help");
    const auto add_sub = [&app](const char* name, const char* desc) {
        CLI::App* sub = app.add_subcommand(name, desc);
        sub->set_help_flag("--help", "print help");
        return sub;
    };

    // encode
    auto* enc = add_sub("encode", "quantize a CSV series into a tensor file");
    std::string enc_in, enc_out;
    int enc_h = 200;
    double enc_ms = 0.0;
    bool enc_auto = false, enc_nozscore = false;
    enc->add_option("--input", enc_in)->required();
    enc->add_option("--output", enc_out)->required();
    enc->add_option("--h", enc_h);
    auto* enc_ms_opt = enc->add_option("--ms", enc_ms);
    enc->add_flag("--auto-ms", enc_auto, "solve for the optimal scale");
    enc->add_flag("--no-zscore", enc_nozscore, "skip global z-scoring");

    // decode
    auto* dec = add_sub("decode", "reconstruct a CSV series from a tensor file");
    std::string dec_in, dec_out;
    double dec_ms = 0.0;
    dec->add_option("--input", dec_in)->required();
    dec->add_option("--output", dec_out)->required();
    dec->add_option("--ms", dec_ms)->required();

    // render
    auto* ren = add_sub("render", "draw one channel as a plain bitmap");
    std::string ren_in, ren_out;
    int ren_channel = 0;
    ren->add_option("--input", ren_in)->required();
    ren->add_option("--output", ren_out)->required();
    ren->add_option("--channel", ren_channel);

    // gen-sine
    auto* gen = add_sub("gen-sine", "write a synthetic noisy-sine CSV");
    long long gen_t = 2000;
    int gen_c = 1;
    double gen_period = 96.0, gen_noise = 0.1;
    std::uint64_t gen_seed = 0;
    std::string gen_out;
    gen->add_option("--t", gen_t);
    gen->add_option("--channels", gen_c);
    gen->add_option("--period", gen_period);
    gen->add_option("--noise", gen_noise);
    gen->add_option("--seed", gen_seed);
    gen->add_option("--output", gen_out)->required();

    // solve-ms
    auto* slv = add_sub("solve-ms", "optimal scale for a resolution");
    int slv_h = 200;
    double slv_tol = 1e-6;
    slv->add_option("--h", slv_h)->required();
    slv->add_option("--tol", slv_tol);

    // bound
    auto* bnd = add_sub("bound", "roundtrip-distortion upper bound");
    int bnd_h = 200;
    double bnd_ms = 0.0;
    long long bnd_ct = 1;
    bool bnd_total = false;
    bnd->add_option("--h", bnd_h)->required();
    bnd->add_option("--ms", bnd_ms)->required();
    bnd->add_option("--ct", bnd_ct, "grid element count for --total");
    bnd->add_flag("--total", bnd_total, "scale by the grid element count");

    // table1
    auto* tbl = add_sub("table1", "optimal scale table for the reference resolutions");
    std::string tbl_out;
    tbl->add_option("--output", tbl_out);

    // verify-sme
    auto* ver = add_sub("verify-sme", "empirical roundtrip error vs the bound");
    int ver_h = 200, ver_c = 1, ver_t = 1;
    double ver_ms = 0.0;
    long long ver_n = 100000;
    std::uint64_t ver_seed = 0;
    std::string ver_out;
    ver->add_option("--h", ver_h)->required();
    ver->add_option("--ms", ver_ms)->required();
    ver->add_option("--n", ver_n);
    ver->add_option("--seed", ver_seed);
    ver->add_option("--c", ver_c);
    ver->add_option("--t", ver_t);
    ver->add_option("--output", ver_out);

    // check-convergence
    auto* cnv = add_sub("check-convergence", "bound along a resolution schedule");
    double cnv_ms = 0.0;
    std::vector<long long> cnv_schedule = {50, 100, 200, 400, 800};
    std::string cnv_out;
    cnv->add_option("--ms", cnv_ms)->required();
    cnv->add_option("--h-schedule", cnv_schedule)->delimiter(',');
    cnv->add_option("--output", cnv_out);

    // config-driven commands
    Overrides ov;
    std::string cfg_path, ck_path, out_path;
    auto add_config_opts = [&](CLI::App* cmd, bool with_checkpoint) {
        cmd->add_option("--config", cfg_path)->required();
        cmd->add_option("--h", ov.h);
        cmd->add_option("--ms", ov.ms);
        cmd->add_option("--epochs", ov.epochs);
        cmd->add_option("--seed", ov.seed);
        cmd->add_option("--lookback", ov.lookback);
        cmd->add_option("--horizon", ov.horizon);
        cmd->add_option("--out-dir", ov.out_dir);
        if (with_checkpoint) cmd->add_option("--checkpoint", ck_path);
    };

    auto* trn = add_sub("train", "fit the reference predictor on the train split");
    add_config_opts(trn, false);

    auto* prd = add_sub("predict", "write test-split predictions");
    add_config_opts(prd, true);
    prd->add_option("--output", out_path)->required();

    auto* evl = add_sub("eval", "score a predictor on the test split");
    add_config_opts(evl, true);
    evl->add_option("--output", out_path);

    auto* exw = add_sub("export-windows", "dump normalized window pairs for inspection");
    add_config_opts(exw, false);
    std::string exw_split = "train";
    exw->add_option("--split", exw_split);
    exw->add_option("--output", out_path)->required();

    auto* swp = add_sub("sweep", "error across a scale or resolution grid");
    add_config_opts(swp, false);
    std::string swp_vary = "ms", swp_target = "codec";
    std::vector<double> swp_grid;
    long long swp_n = 200000;
    swp->add_option("--vary", swp_vary);
    swp->add_option("--target", swp_target);
    swp->add_option("--grid", swp_grid)->delimiter(',');
    swp->add_option("--n", swp_n);
    swp->add_option("--output", out_path);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        app.exit(e);
        return kExitValidation;
    }

    try {
        if (*enc) {
            std::optional<double> ms;
            if (enc_ms_opt->count()) ms = enc_ms;
            if (!ms && !enc_auto)
                throw ValidationError("encode: pass --ms or --auto-ms");
            return cmd_encode(enc_in, enc_out, enc_h, ms, !enc_nozscore);
        }
        if (*dec) return cmd_decode(dec_in, dec_out, dec_ms);
        if (*ren) return cmd_render(ren_in, ren_out, ren_channel);
        if (*gen) return cmd_gen_sine(gen_t, gen_c, gen_period, gen_noise, gen_seed, gen_out);
        if (*slv) return cmd_solve_ms(slv_h, slv_tol);
        if (*bnd) return cmd_bound(bnd_h, bnd_ms, bnd_ct, bnd_total);
        if (*tbl) return cmd_table1(tbl_out);
        if (*ver) return cmd_verify_sme(ver_h, ver_ms, ver_n, ver_seed, ver_c, ver_t, ver_out);
        if (*cnv) return cmd_check_convergence(cnv_ms, cnv_schedule, cnv_out);
        if (*trn) return cmd_train(cfg_path, ov);
        if (*prd) return cmd_predict(cfg_path, ov, ck_path, out_path);
        if (*evl) return cmd_eval(cfg_path, ov, ck_path, out_path);
        if (*exw) return cmd_export_windows(cfg_path, ov, exw_split, out_path);
        if (*swp) return cmd_sweep(cfg_path, ov, swp_vary, swp_target, swp_grid, swp_n, out_path);
        throw ValidationError("no subcommand");
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const NumericError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return kExitInternal;
    }
}
