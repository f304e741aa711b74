// Black-box checks of the command-line surface: exit codes, file-level
// roundtrips, and output shapes. Usage: test_cli <path-to-mvts-cli>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

int g_failures = 0;

#define CHECK_MSG(cond, msg)                                              \
    do {                                                                  \
        if (!(cond)) {                                                    \
            std::printf("[FAIL] %s:%d  %s\n", __FILE__, __LINE__, msg);   \
            ++g_failures;                                                 \
        }                                                                 \
    } while (0)

std::string g_cli;
fs::path g_dir;

int run(const std::string& args, std::string* out_text = nullptr) {
    const fs::path log = g_dir / "cmd_out.txt";
    const std::string command = g_cli + " " + args + " > " + log.string() + " 2>&1";
    const int status = std::system(command.c_str());
    if (out_text) {
        std::ifstream in(log);
        std::ostringstream os;
        os << in.rdbuf();
        *out_text = os.str();
    }
    if (WIFEXITED(status)) return WEXITSTATUS(status);
    return -1;
}

std::vector<std::vector<double>> read_csv_values(const fs::path& path) {
    std::ifstream in(path);
    std::vector<std::vector<double>> rows;
    std::string line;
    bool header_seen = false;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (!header_seen) {
            header_seen = true;
            continue;
        }
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
        rows.push_back(std::move(row));
    }
    return rows;
}

void roundtrip_bound() {
    const double ms = 3.0;
    const int h = 40;
    CHECK_MSG(run("gen-sine --t 150 --period 30 --noise 0.05 --seed 12 --output " +
                  (g_dir / "rt.csv").string()) == 0,
              "gen-sine failed");
    CHECK_MSG(run("encode --input " + (g_dir / "rt.csv").string() + " --h 40 --ms 3.0 " +
                  "--no-zscore --output " + (g_dir / "rt.mvts").string()) == 0,
              "encode failed");
    CHECK_MSG(run("decode --input " + (g_dir / "rt.mvts").string() + " --ms 3.0 --output " +
                  (g_dir / "rt_back.csv").string()) == 0,
              "decode failed");
    const auto original = read_csv_values(g_dir / "rt.csv");
    const auto decoded = read_csv_values(g_dir / "rt_back.csv");
    CHECK_MSG(original.size() == decoded.size() && original.size() == 150, "row count mismatch");
    double worst = 0.0;
    for (std::size_t r = 0; r < original.size(); ++r)
        worst = std::max(worst, std::fabs(original[r][0] - decoded[r][0]));
    // half a bin width, plus the documented 6-decimal CSV rounding
    CHECK_MSG(worst <= ms / h + 1e-6, "roundtrip error above ms/h");
}

void render_staircase() {
    CHECK_MSG(run("gen-sine --t 48 --period 24 --noise 0.0 --seed 1 --output " +
                  (g_dir / "clean.csv").string()) == 0,
              "gen-sine failed");
    CHECK_MSG(run("encode --input " + (g_dir / "clean.csv").string() + " --h 12 --ms 1.2 " +
                  "--no-zscore --output " + (g_dir / "clean.mvts").string()) == 0,
              "encode failed");
    CHECK_MSG(run("render --input " + (g_dir / "clean.mvts").string() + " --channel 0 " +
                  "--output " + (g_dir / "clean.pbm").string()) == 0,
              "render failed");
    std::ifstream in(g_dir / "clean.pbm");
    std::string line;
    std::getline(in, line);
    CHECK_MSG(line == "P1", "missing P1 magic");
    std::getline(in, line);
    CHECK_MSG(line.rfind("# config ", 0) == 0, "missing provenance comment");
    std::getline(in, line);
    CHECK_MSG(line == "48 12", "unexpected dimensions");
    std::vector<int> column_ones(48, 0);
    int rows = 0;
    while (std::getline(in, line)) {
        int col = 0;
        for (char ch : line)
            if (ch == '1')
                column_ones[col]++, ++col;
            else if (ch == '0')
                ++col;
        ++rows;
    }
    CHECK_MSG(rows == 12, "row count mismatch");
    for (int k = 0; k < 48; ++k)
        CHECK_MSG(column_ones[k] == 1, "column does not contain exactly one mark");
}

void corrupted_tensor_file() {
    {
        std::ofstream out(g_dir / "bad.mvts", std::ios::binary);
        out << "JUNKJUNKJUNKJUNKJUNKJUNK";
    }
    CHECK_MSG(run("decode --input " + (g_dir / "bad.mvts").string() + " --ms 1.0 --output " +
                  (g_dir / "bad.csv").string()) == 2,
              "corrupted tensor file should exit 2");
}

void validation_exit_codes() {
    CHECK_MSG(run("decode --input /nonexistent.mvts --ms 1 --output x.csv") == 2,
              "missing input should exit 2");
    CHECK_MSG(run("train --config /nonexistent.json") == 2, "missing config should exit 2");
    CHECK_MSG(run("solve-ms --h 1") == 2, "h=1 should exit 2");
    CHECK_MSG(run("solve-ms --no-such-flag") == 2, "parse error should exit 2");
    CHECK_MSG(run("verify-sme --h 64 --ms 2.3 --n 5000 --seed 3") == 0,
              "healthy verification should exit 0");
    // Small scales sit outside the bound's validity: decoding a saturated
    // value to the outer-bin midpoint (not the range edge) adds ms/h per
    // tail sample, which outgrows the interior slack once Phi(ms) < 5/6
    // (ms below ~0.97). The checker must flag that regime.
    CHECK_MSG(run("verify-sme --h 100 --ms 0.5 --n 4000000 --seed 13") == 3,
              "bound violation at small scale should exit 3");
}

void stdout_values() {
    std::string text;
    CHECK_MSG(run("solve-ms --h 200", &text) == 0, "solve-ms failed");
    CHECK_MSG(std::fabs(std::stod(text) - 2.79) <= 0.01, "solve-ms --h 200 not near 2.79");
    CHECK_MSG(run("bound --h 50 --ms 2.29", &text) == 0, "bound failed");
    CHECK_MSG(std::fabs(std::stod(text) - 0.052) <= 0.001, "bound (50, 2.29) not near 0.052");
}

void sweep_row_count() {
    const fs::path cfg = g_dir / "sweep_cfg.json";
    {
        std::ofstream out(cfg);
        out << R"({"dataset":{"synthetic":{"kind":"sine","t":300,"channels":1,"period":48,)"
            << R"("noise":0.1,"seed":5}},"codec":{"h":32,"ms":2.0},)"
            << R"("window":{"lookback":24,"horizon":6},)"
            << R"("predictor":{"kind":"persistence"},"seed":1})";
    }
    CHECK_MSG(run("sweep --config " + cfg.string() +
                  " --vary ms --target codec --grid 1.0,2.0,3.0,4.0 --n 5000 --output " +
                  (g_dir / "sw.csv").string()) == 0,
              "sweep failed");
    CHECK_MSG(read_csv_values(g_dir / "sw.csv").size() == 4, "sweep must emit one row per point");

    // model sweep with the persistence predictor: no training required
    CHECK_MSG(run("sweep --config " + cfg.string() +
                  " --vary h --target model --grid 8,16 --output " +
                  (g_dir / "swm.csv").string()) == 0,
              "model sweep failed");
    CHECK_MSG(read_csv_values(g_dir / "swm.csv").size() == 2, "model sweep row count");

    // predictions: one row per (window, channel, step); test split of 60
    // rows holds 31 windows of 24+6
    CHECK_MSG(run("predict --config " + cfg.string() + " --output " +
                  (g_dir / "pred.csv").string()) == 0,
              "predict failed");
    CHECK_MSG(read_csv_values(g_dir / "pred.csv").size() == 31u * 6u, "prediction row count");
}

void bundled_smoke_config(const std::string& config_path) {
    const fs::path out = g_dir / "smoke";
    CHECK_MSG(run("train --config " + config_path + " --out-dir " + out.string()) == 0,
              "bundled smoke train failed");
    CHECK_MSG(run("eval --config " + config_path + " --checkpoint " +
                  (out / "checkpoint.mvck").string() + " --output " +
                  (out / "eval.csv").string()) == 0,
              "bundled smoke eval failed");
    // aggregate rows: reference first, persistence second, floor third
    std::ifstream in(out / "eval.csv");
    std::string line;
    double model_mae = -1.0, persistence_mae = -1.0, floor_mae = -1.0;
    while (std::getline(in, line)) {
        if (line.find(",aggregate,") == std::string::npos) continue;
        const auto last_comma = line.rfind(',');
        const double mae = std::stod(line.substr(last_comma + 1));
        if (line.rfind("reference,", 0) == 0) model_mae = mae;
        if (line.rfind("persistence,", 0) == 0) persistence_mae = mae;
        if (line.rfind("floor,", 0) == 0) floor_mae = mae;
    }
    CHECK_MSG(model_mae > 0.0 && persistence_mae > 0.0 && floor_mae > 0.0,
              "missing aggregate rows in the eval report");
    CHECK_MSG(model_mae < persistence_mae, "bundled smoke: model must beat persistence");
    CHECK_MSG(floor_mae <= model_mae, "bundled smoke: floor must lower-bound the model");
}

} // namespace

int main(int argc, char** argv) {
    if (argc < 2) {
        std::fprintf(stderr, "usage: test_cli <path-to-mvts> [smoke-config.json]\n");
        return 2;
    }
    g_cli = argv[1];
    g_dir = fs::temp_directory_path() / "mvts_cli_test";
    fs::remove_all(g_dir);
    fs::create_directories(g_dir);

    roundtrip_bound();
    render_staircase();
    corrupted_tensor_file();
    validation_exit_codes();
    stdout_values();
    sweep_row_count();
    if (argc > 2) bundled_smoke_config(argv[2]);

    fs::remove_all(g_dir);
    if (g_failures == 0) {
        std::printf("cli checks passed\n");
        return 0;
    }
    std::printf("%d cli check(s) failed\n", g_failures);
    return 1;
}
