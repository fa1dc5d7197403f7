// Copyright (c) 2026 The semiot authors
// SPDX-License-Identifier: Apache-2.0
//
// End-to-end tests of the command-line tool: every subcommand is exercised
// through std::system against the built binary (SEMIOT_CLI_PATH).

#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "semiot/semiot.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string cli() { return std::string(SEMIOT_CLI_PATH); }

// Runs under /bin/sh with SEMIOT_SEED scrubbed unless the caller sets it.
int run_cmd(const std::string& args, std::string* output = nullptr,
            const std::string& env = "env -u SEMIOT_SEED ") {
    static int counter = 0;
    const std::string capture =
        (fs::temp_directory_path() / ("semiot_cli_out_" + std::to_string(counter++))).string();
    const std::string cmd = env + cli() + " " + args + " > " + capture + " 2>&1";
    const int rc = std::system(cmd.c_str());
    if (output) {
        std::ifstream in(capture, std::ios::binary);
        std::stringstream ss;
        ss << in.rdbuf();
        *output = ss.str();
    }
    fs::remove(capture);
    if (rc == -1) return -1;
    return WEXITSTATUS(rc);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void spit(const fs::path& p, const std::string& content) {
    std::ofstream out(p, std::ios::binary);
    out << content;
}

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "semiot_cli_tests" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> lines;
    std::stringstream ss(text);
    std::string line;
    while (std::getline(ss, line)) lines.push_back(line);
    return lines;
}

std::vector<std::string> split_commas(const std::string& line) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    return cells;
}

// Drops the trailing ms column so runs can be compared byte-wise.
std::string strip_ms(const std::string& csv) {
    std::string out;
    for (const std::string& line : lines_of(csv)) {
        const auto pos = line.rfind(',');
        out += line.substr(0, pos) + "\n";
    }
    return out;
}

void write_idx_images(const fs::path& p, std::size_t count, std::size_t side) {
    std::string bytes;
    auto be32 = [&](std::uint32_t v) {
        bytes.push_back(char((v >> 24) & 0xff));
        bytes.push_back(char((v >> 16) & 0xff));
        bytes.push_back(char((v >> 8) & 0xff));
        bytes.push_back(char(v & 0xff));
    };
    be32(0x803);
    be32(std::uint32_t(count));
    be32(std::uint32_t(side));
    be32(std::uint32_t(side));
    for (std::size_t i = 0; i < count * side * side; ++i)
        bytes.push_back(char((i * 7) % 256));
    spit(p, bytes);
}

}  // namespace

TEST_CASE("counterexample writes reproducible artifacts") {
    const fs::path a = fresh_dir("ce_a"), b = fresh_dir("ce_b");
    std::string out;
    REQUIRE(run_cmd("counterexample --steps 120 --out-dir " + a.string(), &out) == 0);
    CHECK(out.find("counterexample: wrote") != std::string::npos);
    for (const char* f : {"traj_unreg.csv", "traj_reg.csv", "fig1.svg", "manifest.json"})
        CHECK(fs::exists(a / f));

    const std::string svg = slurp(a / "fig1.svg");
    CHECK(svg.rfind("<svg", 0) == 0);
    CHECK(fs::file_size(a / "fig1.svg") < 1000000);

    const auto reg_lines = lines_of(slurp(a / "traj_reg.csv"));
    REQUIRE(reg_lines.size() == 122);  // header + step 0 + 120 logged steps
    CHECK(reg_lines[0] == "step,objective,marginal_violation,theta_0,theta_1");
    const auto last = split_commas(reg_lines.back());
    REQUIRE(last.size() == 5);
    CHECK(last[0] == "120");
    CHECK(std::abs(std::stod(last[3]) - 0.0) <= 1e-3);
    CHECK(std::abs(std::stod(last[4]) - 0.5) <= 1e-3);

    // The unregularized branch keeps bouncing between the Laguerre cells.
    const auto un_lines = lines_of(slurp(a / "traj_unreg.csv"));
    const double y_last = std::stod(split_commas(un_lines.back())[4]);
    const double y_prev = std::stod(split_commas(un_lines[un_lines.size() - 2])[4]);
    CHECK(std::abs(y_last - y_prev) > 0.05);

    const json manifest = json::parse(slurp(a / "manifest.json"));
    CHECK(manifest.at("command") == "counterexample");
    CHECK(manifest.at("payload").at("config_reg").at("lambda").get<double>() == 0.1);

    REQUIRE(run_cmd("counterexample --steps 120 --out-dir " + b.string()) == 0);
    CHECK(slurp(a / "traj_unreg.csv") == slurp(b / "traj_unreg.csv"));
    CHECK(slurp(a / "traj_reg.csv") == slurp(b / "traj_reg.csv"));
    CHECK(slurp(a / "fig1.svg") == slurp(b / "fig1.svg"));
}

TEST_CASE("counterexample with zero steps emits only the initial state") {
    const fs::path dir = fresh_dir("ce_zero");
    REQUIRE(run_cmd("counterexample --steps 0 --out-dir " + dir.string()) == 0);
    for (const char* f : {"traj_unreg.csv", "traj_reg.csv"}) {
        const auto lines = lines_of(slurp(dir / f));
        REQUIRE(lines.size() == 2);
        const auto row = split_commas(lines[1]);
        CHECK(row[0] == "0");
        CHECK(row[3] == "1");     // theta0 default 1,-0.5
        CHECK(row[4] == "-0.5");
    }
}

TEST_CASE("train rejects bad invocations") {
    const fs::path dir = fresh_dir("train_bad");
    CHECK(run_cmd("train --out-dir " + dir.string()) == 2);  // --data is required
    CHECK(run_cmd("train --data " + (dir / "missing.csv").string()) == 2);

    spit(dir / "toy.csv", "0,0\n0,1\n");
    spit(dir / "bad_key.json", "{\"outer_stepz\": 5}");
    std::string out;
    CHECK(run_cmd("train --data " + (dir / "toy.csv").string() + " --config " +
                      (dir / "bad_key.json").string() + " --out-dir " + dir.string(),
                  &out) == 2);
    CHECK(out.find("unknown config key") != std::string::npos);

    // Generator output dimension must match the dataset.
    spit(dir / "wrong_dim.json", "{\"widths\": [3], \"outer_steps\": 1}");
    CHECK(run_cmd("train --data " + (dir / "toy.csv").string() + " --config " +
                      (dir / "wrong_dim.json").string() + " --out-dir " + dir.string(),
                  &out) == 2);
    CHECK(out.find("does not match dataset dimension") != std::string::npos);

    CHECK(run_cmd("train --data " + (dir / "toy.csv").string() + " --format xml") == 2);
}

TEST_CASE("train fits a translation to the two-atom dataset") {
    const fs::path dir = fresh_dir("train_toy");
    spit(dir / "toy.csv", "0,0\n0,1\n");
    json cfg;
    cfg["lambda"] = 0.5;
    cfg["batch_size"] = 100;
    cfg["outer_steps"] = 150;
    cfg["psi_steps"] = 20;
    cfg["lr"] = 1e-2;
    cfg["seed"] = 5;
    cfg["log_cadence"] = 10;
    spit(dir / "cfg.json", cfg.dump());

    std::string out;
    REQUIRE(run_cmd("train --data " + (dir / "toy.csv").string() + " --config " +
                        (dir / "cfg.json").string() + " --out-dir " + (dir / "out").string(),
                    &out) == 0);
    CHECK(out.find("train: 150 steps done") != std::string::npos);

    const auto lines = lines_of(slurp(dir / "out" / "trajectory.csv"));
    REQUIRE(lines.size() == 16);  // header + 15 cadence rows
    CHECK(lines[0] == "step,objective,marginal_violation,theta_0,theta_1,ms");
    const auto last = split_commas(lines.back());
    CHECK(last[0] == "150");
    CHECK(std::stod(last[2]) < 0.1);  // marginal violation near stationarity

    const semiot::Checkpoint ck = semiot::load_checkpoint((dir / "out" / "checkpoint.json").string());
    CHECK(ck.state.outer_step == 150);
    CHECK(ck.config.seed == 5);
    CHECK(ck.generator.kind() == semiot::GeneratorKind::Translation);

    const json manifest = json::parse(slurp(dir / "out" / "manifest.json"));
    CHECK(manifest.at("command") == "train");
    CHECK(manifest.at("payload").at("final_step").get<int>() == 150);
}

TEST_CASE("train resumes from a checkpoint without changing the trajectory") {
    const fs::path dir = fresh_dir("train_resume");
    spit(dir / "toy.csv", "0,0\n0,1\n");
    json cfg;
    cfg["lambda"] = 0.5;
    cfg["batch_size"] = 30;
    cfg["outer_steps"] = 60;
    cfg["psi_steps"] = 5;
    cfg["lr"] = 1e-2;
    cfg["seed"] = 5;
    cfg["log_cadence"] = 10;
    spit(dir / "cfg_full.json", cfg.dump());
    cfg["outer_steps"] = 30;
    spit(dir / "cfg_half.json", cfg.dump());

    const std::string data = (dir / "toy.csv").string();
    REQUIRE(run_cmd("train --data " + data + " --config " + (dir / "cfg_full.json").string() +
                    " --out-dir " + (dir / "full").string()) == 0);
    REQUIRE(run_cmd("train --data " + data + " --config " + (dir / "cfg_half.json").string() +
                    " --out-dir " + (dir / "half").string()) == 0);

    // Raise the step budget inside the saved checkpoint, then resume.
    json ckpt = json::parse(slurp(dir / "half" / "checkpoint.json"));
    ckpt["config"]["outer_steps"] = 60;
    spit(dir / "resume_from.json", ckpt.dump(2) + "\n");
    REQUIRE(run_cmd("train --data " + data + " --resume " + (dir / "resume_from.json").string() +
                    " --out-dir " + (dir / "resumed").string()) == 0);

    const std::string full_csv = strip_ms(slurp(dir / "full" / "trajectory.csv"));
    const std::string half_csv = strip_ms(slurp(dir / "half" / "trajectory.csv"));
    const std::string tail_csv = strip_ms(slurp(dir / "resumed" / "trajectory.csv"));
    const auto tail_lines = lines_of(tail_csv);
    std::string glued = half_csv;
    for (std::size_t i = 1; i < tail_lines.size(); ++i) glued += tail_lines[i] + "\n";
    CHECK(glued == full_csv);

    const json full_ck = json::parse(slurp(dir / "full" / "checkpoint.json"));
    const json res_ck = json::parse(slurp(dir / "resumed" / "checkpoint.json"));
    CHECK(full_ck.at("state") == res_ck.at("state"));
}

TEST_CASE("train aborts with exit code 3 on numeric blow-up") {
    const fs::path dir = fresh_dir("train_abort");
    spit(dir / "toy.csv", "0,0\n0,1\n");
    json cfg;
    cfg["lambda"] = 0.5;
    cfg["batch_size"] = 1;
    cfg["outer_steps"] = 1;
    cfg["psi_steps"] = 0;
    cfg["optimizer"] = "plain";
    cfg["lr"] = 0.1;
    cfg["theta0"] = {1e155, 0.0};
    cfg["latent"] = "dirac";
    spit(dir / "cfg.json", cfg.dump());

    std::string out;
    CHECK(run_cmd("train --data " + (dir / "toy.csv").string() + " --config " +
                      (dir / "cfg.json").string() + " --out-dir " + (dir / "out").string(),
                  &out) == 3);
    CHECK(out.find("training aborted at outer step 1") != std::string::npos);
    // The abort path still persisted the last good state.
    const semiot::Checkpoint ck = semiot::load_checkpoint((dir / "out" / "checkpoint.json").string());
    CHECK(ck.state.outer_step == 0);
}

TEST_CASE("train consumes idx datasets") {
    const fs::path dir = fresh_dir("train_idx");
    write_idx_images(dir / "imgs.idx", 6, 4);
    json cfg;
    cfg["lambda"] = 1.0;
    cfg["batch_size"] = 8;
    cfg["outer_steps"] = 20;
    cfg["psi_steps"] = 3;
    cfg["lr"] = 1e-2;
    cfg["log_cadence"] = 5;
    spit(dir / "cfg.json", cfg.dump());
    REQUIRE(run_cmd("train --data " + (dir / "imgs.idx").string() + " --format idx --config " +
                    (dir / "cfg.json").string() + " --out-dir " + (dir / "out").string()) == 0);
    const auto lines = lines_of(slurp(dir / "out" / "trajectory.csv"));
    REQUIRE(lines.size() == 5);  // header + steps 5,10,15,20
    CHECK(lines[0].rfind("step,objective,marginal_violation,theta_0,", 0) == 0);
    CHECK(split_commas(lines[0]).size() == 3 + 16 + 1);
}

TEST_CASE("sample emits deterministic points from a checkpoint") {
    const fs::path dir = fresh_dir("sample_basic");
    semiot::Checkpoint ck;
    ck.generator = semiot::Generator::translation(2);
    ck.latent = semiot::LatentSampler::dirac({0.0, 0.0});
    ck.state.theta = {0.0, 0.5};
    ck.state.psi = {0.0, 0.0};
    ck.state.adam = semiot::AdamState::init(2, 1e-4);
    ck.state.next_stream = 7;
    semiot::save_checkpoint(ck, (dir / "ck.json").string());

    const std::string out_csv = (dir / "s.csv").string();
    REQUIRE(run_cmd("sample --checkpoint " + (dir / "ck.json").string() + " --count 3 --out " +
                    out_csv) == 0);
    CHECK(slurp(out_csv) == "x_0,x_1\n0,0.5\n0,0.5\n0,0.5\n");
    CHECK(fs::exists(dir / "s.csv.manifest.json"));

    REQUIRE(run_cmd("sample --checkpoint " + (dir / "ck.json").string() + " --count 0 --out " +
                    out_csv) == 0);
    CHECK(slurp(out_csv) == "x_0,x_1\n");

    // Stochastic latents reproduce bit-for-bit under the stored seed.
    ck.latent = semiot::LatentSampler::standard_gaussian(2, 9);
    ck.state.theta = {0.0, 0.0};
    semiot::save_checkpoint(ck, (dir / "ck_g.json").string());
    const std::string g1 = (dir / "g1.csv").string(), g2 = (dir / "g2.csv").string();
    REQUIRE(run_cmd("sample --checkpoint " + (dir / "ck_g.json").string() + " --count 5 --out " +
                    g1) == 0);
    REQUIRE(run_cmd("sample --checkpoint " + (dir / "ck_g.json").string() + " --count 5 --out " +
                    g2) == 0);
    CHECK(slurp(g1) == slurp(g2));
    REQUIRE(run_cmd("sample --checkpoint " + (dir / "ck_g.json").string() +
                    " --count 5 --seed 10 --out " + g2) == 0);
    CHECK(slurp(g1) != slurp(g2));
}

TEST_CASE("sample rejects damaged checkpoints") {
    const fs::path dir = fresh_dir("sample_bad");
    spit(dir / "v99.json", "{\"format\": \"semiot-checkpoint\", \"version\": 99}");
    std::string out;
    CHECK(run_cmd("sample --checkpoint " + (dir / "v99.json").string() + " --out " +
                      (dir / "s.csv").string(),
                  &out) == 2);
    CHECK(out.find("version 99") != std::string::npos);
    CHECK(run_cmd("sample --checkpoint " + (dir / "nope.json").string() + " --out " +
                  (dir / "s.csv").string()) == 2);
}

TEST_CASE("sample renders image-shaped outputs as a pgm montage") {
    const fs::path dir = fresh_dir("sample_pgm");
    semiot::Checkpoint ck;
    ck.generator = semiot::Generator::translation(64);
    ck.latent = semiot::LatentSampler::dirac(semiot::Point(64, 0.0));
    ck.state.theta.resize(64);
    for (std::size_t i = 0; i < 64; ++i) ck.state.theta[i] = double(i) / 63.0;
    ck.state.psi = {0.0};
    ck.state.adam = semiot::AdamState::init(64, 1e-4);
    semiot::save_checkpoint(ck, (dir / "ck.json").string());

    REQUIRE(run_cmd("sample --checkpoint " + (dir / "ck.json").string() + " --count 4 --out " +
                    (dir / "img.csv").string()) == 0);
    REQUIRE(fs::exists(dir / "img.pgm"));
    const std::string pgm = slurp(dir / "img.pgm");
    CHECK(pgm.rfind("P5\n", 0) == 0);
    CHECK(pgm.find("255") != std::string::npos);
}

TEST_CASE("validate suites pass and report per-check lines") {
    for (const char* suite : {"closed-forms", "gradients", "duality"}) {
        std::string out;
        const int rc = run_cmd(std::string("validate --suite ") + suite, &out);
        INFO(out);
        CHECK(rc == 0);
        CHECK(out.find("manifest command=validate") != std::string::npos);
        CHECK(out.find("check=") != std::string::npos);
        CHECK(out.find("status=pass") != std::string::npos);
        CHECK(out.find("status=fail") == std::string::npos);
        CHECK(out.find("validate: PASS") != std::string::npos);
    }
    CHECK(run_cmd("validate --suite bogus") == 2);
}

TEST_CASE("seed resolution prefers the flag over the environment") {
    std::string by_flag, by_env, both, other;
    REQUIRE(run_cmd("validate --suite duality --seed 777", &by_flag) == 0);
    REQUIRE(run_cmd("validate --suite duality", &by_env, "env SEMIOT_SEED=777 ") == 0);
    REQUIRE(run_cmd("validate --suite duality --seed 777", &both, "env SEMIOT_SEED=1 ") == 0);
    REQUIRE(run_cmd("validate --suite duality --seed 778", &other) == 0);
    CHECK(by_flag == by_env);
    CHECK(by_flag == both);
    CHECK(by_flag != other);
    CHECK(run_cmd("validate --suite duality", nullptr, "env SEMIOT_SEED=zzz ") == 2);
}

TEST_CASE("usage errors exit with code 2") {
    CHECK(run_cmd("") == 2);                 // a subcommand is required
    CHECK(run_cmd("frobnicate") == 2);       // unknown subcommand
    CHECK(run_cmd("sample --count 3") == 2); // missing required flags
    std::string help;
    CHECK(run_cmd("--help", &help) == 0);
    CHECK(help.find("counterexample") != std::string::npos);
}
