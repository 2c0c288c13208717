#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "mtl/experiment.hpp"
#include "mtl/io.hpp"
#include "support.hpp"

#include <cmath>
#include <filesystem>
#include <functional>
#include <fstream>
#include <random>
#include <sstream>

using namespace mtl;
using Mat = Matrix<double>;

namespace {

template <typename F>
Errc code_of(F&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("no mtl::Error thrown");
    return Errc::BadSpec;
}

std::string message_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.what();
    }
    return {};
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::filesystem::path scratch_dir(const std::string& name) {
    const auto d = std::filesystem::temp_directory_path() / ("mtl_test_io_" + name);
    std::filesystem::remove_all(d);
    std::filesystem::create_directories(d);
    return d;
}

}  // namespace

TEST_CASE("eight-row file") {
    std::istringstream in("task,class,f1,f2,f3\n"
                          "2,1,1,2,3\n"
                          "1,1,0.5,-1,2e-3\n"
                          "1,2,4,5,6\n"
                          "2,2,7,8,9\n"
                          "1,1,1.5,+1,0\n"
                          "2,1,-1,-2,-3\n"
                          "1,2,0,0,0\n"
                          "2,2,10,11,12\n");
    const auto ds = read_dataset(in);
    CHECK(ds.tasks() == 2);
    CHECK(ds.classes() == 2);
    CHECK(ds.dim() == 3);
    CHECK(ds.counts().sum() == 8);
    CHECK(ds.counts().minCoeff() == 2);
    // file order is kept inside a block
    CHECK(ds.block(0, 0)(0, 0) == 0.5);
    CHECK(ds.block(0, 0)(2, 0) == 2e-3);
    CHECK(ds.block(0, 0)(1, 1) == 1.0);
    CHECK(ds.block(1, 0)(2, 1) == -3.0);
    CHECK(ds.block(1, 1)(0, 1) == 10.0);
}

TEST_CASE("malformed files") {
    const auto parse = [](const std::string& text) {
        std::istringstream in(text);
        return read_dataset(in, "data.csv");
    };
    SUBCASE("non-numeric value names the line") {
        const std::string text = "task,class,f1\n1,1,0.5\n1,2,abc\n";
        CHECK(code_of([&] { parse(text); }) == Errc::ParseError);
        CHECK(message_of([&] { parse(text); }).find("data.csv:3:") != std::string::npos);
    }
    SUBCASE("wrong field count") { CHECK(code_of([&] { parse("task,class,f1\n1,1,0.5,2\n"); }) == Errc::ParseError); }
    SUBCASE("non-finite value") { CHECK(code_of([&] { parse("task,class,f1\n1,1,nan\n1,2,1\n"); }) == Errc::ParseError); }
    SUBCASE("zero class index") { CHECK(code_of([&] { parse("task,class,f1\n1,0,1\n"); }) == Errc::ParseError); }
    SUBCASE("bad header") {
        CHECK(code_of([&] { parse("task,label,f1\n1,1,0\n"); }) == Errc::SchemaError);
        CHECK(code_of([&] { parse("task,class,f2\n1,1,0\n"); }) == Errc::SchemaError);
        CHECK(code_of([&] { parse("task,class\n1,1\n"); }) == Errc::SchemaError);
        CHECK(code_of([&] { parse(""); }) == Errc::SchemaError);
    }
    SUBCASE("empty class") { CHECK(code_of([&] { parse("task,class,f1\n1,1,0\n1,3,1\n"); }) == Errc::SchemaError); }
    SUBCASE("byte order mark and CRLF") {
        const auto ds = parse("\xEF\xBB\xBFtask,class,f1\r\n1,1,0.25\r\n1,2,-0.25\r\n");
        CHECK(ds.block(0, 1)(0, 0) == -0.25);
    }
    SUBCASE("missing file") { CHECK(code_of([] { load_dataset("/nonexistent/dir/x.csv"); }) == Errc::IoError); }
}

TEST_CASE("dataset round trip is exact") {
    std::mt19937_64 rng(3);
    auto ds = testing::random_dataset(testing::counts({{3, 4}, {2, 5}}), 7, rng, 3.0);
    std::vector<Mat> blocks;
    for (Index a = 0; a < 4; ++a) blocks.push_back(ds.block(a / 2, a % 2));
    blocks[0](0, 0) = 1e-300;
    blocks[0](1, 0) = -1.7976931348623157e308;
    blocks[0](2, 0) = 0.1;
    blocks[0](3, 0) = 5e-324;
    const Dataset<double> raw(2, 2, blocks);
    const auto dir = scratch_dir("round");
    save_dataset((dir / "d.csv").string(), raw);
    const auto back = load_dataset((dir / "d.csv").string());
    CHECK(back.counts() == raw.counts());
    for (Index a = 0; a < 4; ++a) CHECK(back.block(a / 2, a % 2) == raw.block(a / 2, a % 2));
    std::filesystem::remove_all(dir);
}

TEST_CASE("format_double is the shortest round-trip form") {
    CHECK(format_double(0.1) == "0.1");
    CHECK(format_double(-2.0) == "-2");
    CHECK(format_double(1e-7) == "1e-07");
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1e6, 1e6);
    for (int i = 0; i < 1000; ++i) {
        const double x = u(rng) * std::pow(10.0, double(i % 40 - 20));
        CHECK(std::stod(format_double(x)) == x);
    }
}

TEST_CASE("config JSON") {
    for (const char* name : {"table3", "fig2", "fig4", "roc"}) {
        const auto cfg = preset_config(name);
        const auto j = to_json(cfg);
        CHECK(to_json(config_from_json(j)) == j);
    }
    SUBCASE("preset defaults with overrides") {
        const auto cfg = config_from_json(nlohmann::json{{"preset", "fig2"}, {"seed", 9}, {"labels", "classical"}});
        CHECK(cfg.seed == 9);
        CHECK(cfg.labels == LabelMode::classical);
        CHECK(cfg.hyper.lambda == 10.0);
        CHECK(cfg.task == 1);
    }
    SUBCASE("schema errors") {
        CHECK(code_of([] { config_from_json(nlohmann::json{{"seeed", 1}}); }) == Errc::SchemaError);
        CHECK(code_of([] { config_from_json(nlohmann::json{{"seed", "one"}}); }) == Errc::SchemaError);
        CHECK(code_of([] { config_from_json(nlohmann::json{{"labels", "best"}}); }) == Errc::SchemaError);
        CHECK(code_of([] { config_from_json(nlohmann::json{{"schema_version", 99}}); }) == Errc::SchemaError);
        CHECK(code_of([] { config_from_json(nlohmann::json::array()); }) == Errc::SchemaError);
    }
    SUBCASE("malformed file") {
        const auto dir = scratch_dir("cfg");
        std::ofstream(dir / "c.json") << "{\"seed\": 1,";
        CHECK(code_of([&] { load_config((dir / "c.json").string()); }) == Errc::ParseError);
        CHECK(code_of([&] { load_config((dir / "missing.json").string()); }) == Errc::IoError);
        std::filesystem::remove_all(dir);
    }
    SUBCASE("unknown preset") { CHECK(code_of([] { preset_config("table9"); }) == Errc::BadSpec); }
}

TEST_CASE("synthetic layouts") {
    SUBCASE("beta 1 makes the tasks identical") {
        const auto spec = synthetic_spec(preset_config("table3"), 1.0);
        CHECK((spec.means.topRows(5) - spec.means.bottomRows(5)).cwiseAbs().maxCoeff() < 1e-15);
    }
    SUBCASE("orthogonal Gram") {
        const double beta = 0.5;
        const auto spec = synthetic_spec(preset_config("table3"), beta);
        const Mat g = spec.means * spec.means.transpose();
        Mat want(10, 10);
        want << Mat::Identity(5, 5) * 4.0, Mat::Identity(5, 5) * 4.0 * beta, Mat::Identity(5, 5) * 4.0 * beta,
            Mat::Identity(5, 5) * 4.0;
        CHECK((g - want).cwiseAbs().maxCoeff() < 1e-12);
    }
    SUBCASE("antipodal correlation") {
        const auto spec = synthetic_spec(preset_config("fig4"));
        for (Index t = 1; t < 6; ++t) {
            const double c = spec.means.row(0).dot(spec.means.row(2 * t)) / (spec.means.row(0).norm() * spec.means.row(2 * t).norm());
            CHECK(std::abs(c - preset_config("fig4").betas[std::size_t(t - 1)]) < 1e-12);
            CHECK((spec.means.row(2 * t) + spec.means.row(2 * t + 1)).norm() < 1e-15);
        }
    }
    SUBCASE("sample means lie in the CLT band") {
        auto cfg = preset_config("table3");
        cfg.test_per_class = 0;
        const auto data = experiment_data(cfg, 0.5);
        const auto spec = synthetic_spec(cfg, 0.5);
        for (Index a = 0; a < 10; ++a) {
            const auto& b = data.train.block(a / 5, a % 5);
            const Vector<double> z = (b.rowwise().mean() - spec.means.row(a).transpose()) * std::sqrt(double(b.cols()));
            // 1000 coordinates in total: |z| > 4.5 has probability about 7e-3
            CHECK(z.cwiseAbs().maxCoeff() < 4.5);
        }
    }
}

TEST_CASE("run_experiment output is reproducible") {
    ExperimentConfig cfg;
    cfg.k = 2;
    cfg.m = 2;
    cfg.p = 20;
    cfg.counts = testing::counts({{40, 30}, {10, 12}});
    cfg.betas = {0.6};
    cfg.mean_norm = 1.5;
    cfg.perp_norm = 1.5;
    cfg.test_per_class = 200;
    cfg.task = 1;
    cfg.mc_samples = 1000;
    const auto a = scratch_dir("run_a"), b = scratch_dir("run_b");
    const auto ja = run_experiment(cfg, a.string());
    run_experiment(cfg, b.string());
    CHECK(slurp(a / "report.json") == slurp(b / "report.json"));
    CHECK(ja["schema_version"] == report_schema_version);
    CHECK(ja["results"][0].contains("empirical_mean"));
    CHECK(ja["results"][0].contains("theory_mean"));

    cfg = preset_config("fig2");
    cfg.test_per_class = 100;
    run_experiment(cfg, a.string());
    run_experiment(cfg, b.string());
    for (const char* f : {"report.json", "fig2.csv", "fig2_scores.csv"}) CHECK(slurp(a / f) == slurp(b / f));
    CHECK(slurp(a / "fig2.csv").rfind("beta,labels,threshold", 0) == 0);
    std::filesystem::remove_all(a);
    std::filesystem::remove_all(b);
}
