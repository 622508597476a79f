#include <gtest/gtest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

struct Run {
    int code = -1;
    std::string out;
};

Run cli(const std::string& args)
{
    const std::string cmd = std::string(CUTIN_BENCH_EXE) + " " + args + " 2>/dev/null";
    Run r;
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) return r;
    std::array<char, 4096> buf{};
    while (fgets(buf.data(), buf.size(), pipe)) r.out += buf.data();
    const int status = pclose(pipe);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::vector<fs::path> announced(const std::string& out)
{
    std::vector<fs::path> paths;
    std::istringstream in(out);
    for (std::string line; std::getline(in, line);)
        if (line.rfind("wrote ", 0) == 0) paths.emplace_back(line.substr(6));
    return paths;
}

std::vector<fs::path> files_under(const fs::path& dir)
{
    std::vector<fs::path> out;
    for (const auto& e : fs::recursive_directory_iterator(dir))
        if (e.is_regular_file()) out.push_back(e.path());
    return out;
}

fs::path fresh(const std::string& name)
{
    const fs::path dir = fs::temp_directory_path() / ("cutin_cli_test_" + name);
    fs::remove_all(dir);
    return dir;
}

void expect_all_announced(const Run& r, const fs::path& dir)
{
    const auto paths = announced(r.out);
    for (const auto& p : paths) EXPECT_TRUE(fs::exists(p)) << p;
    EXPECT_EQ(files_under(dir).size(), paths.size()) << r.out;
}

}  // namespace

TEST(Cli, HelpAndVersion)
{
    EXPECT_EQ(cli("--help").code, 0);
    const auto v = cli("--version");
    EXPECT_EQ(v.code, 0);
    EXPECT_NE(v.out.find("0.1.0"), std::string::npos);
}

TEST(Cli, UsageErrorsExitTwo)
{
    EXPECT_EQ(cli("").code, 2);
    EXPECT_EQ(cli("fly").code, 2);
    EXPECT_EQ(cli("run --scenario fig9").code, 2);
    EXPECT_EQ(cli("sweep --grid-preset fig8 --models cc").code, 2);
    EXPECT_EQ(cli("run --scenario fig7 --models foo --out " + fresh("foo").string()).code, 2);
    EXPECT_EQ(cli("run --config /nonexistent/cfg.json --models cc").code, 2);
    EXPECT_EQ(cli("compare --grid-preset fig7 --models dbn --out " + fresh("one").string()).code, 2);
}

TEST(Cli, NumericFailureExitsThree)
{
    const fs::path dir = fresh("numeric");
    fs::create_directories(dir);
    std::ofstream(dir / "big.json") << R"({"scenario": {"ve0": 1e308, "vo0": 1, "dx0": 40}})";
    EXPECT_EQ(cli("run --config " + (dir / "big.json").string() + " --models cc --out " + (dir / "o").string()).code, 3);
    std::ofstream(dir / "grid.json")
        << R"({"grid": {"ego_speeds": [1e308], "cutin_speeds": [10], "lateral_speeds": [1], "initial_distances": [40]}})";
    const auto r = cli("sweep --config " + (dir / "grid.json").string() + " --models cc --out " + (dir / "s").string());
    EXPECT_EQ(r.code, 3);
    EXPECT_TRUE(fs::exists(dir / "s" / "diagnostics.csv"));
    expect_all_announced(r, dir / "s");
}

TEST(Cli, RunWritesTraces)
{
    const fs::path dir = fresh("run");
    const auto r = cli("run --scenario fig5 --models dbn,cc --out " + dir.string());
    ASSERT_EQ(r.code, 0) << r.out;
    EXPECT_TRUE(fs::exists(dir / "trace_dbn.csv"));
    EXPECT_TRUE(fs::exists(dir / "trace_cc.csv"));
    expect_all_announced(r, dir);
}

TEST(Cli, SweepCompareReportCalibrate)
{
    const fs::path dir = fresh("sweep");
    fs::create_directories(dir);
    std::ofstream(dir / "grid.json") << R"({"grid": {"preset": "fig6", "lateral_speeds": [0.5, 1.5],
                                          "initial_distances": [20, 50, 80]}, "models": ["dbn", "cc"]})";
    const std::string cfg = " --config " + (dir / "grid.json").string();

    const auto s = cli("sweep" + cfg + " --threads 2 --out " + (dir / "s").string());
    ASSERT_EQ(s.code, 0) << s.out;
    EXPECT_TRUE(fs::exists(dir / "s" / "heatmap_dbn_70_10.ppm"));
    expect_all_announced(s, dir / "s");

    const auto c = cli("compare" + cfg + " --out " + (dir / "c").string());
    ASSERT_EQ(c.code, 0) << c.out;
    expect_all_announced(c, dir / "c");

    const auto p = cli("report --scenario fig7 --out " + (dir / "p").string());
    ASSERT_EQ(p.code, 0) << p.out;
    expect_all_announced(p, dir / "p");

    const auto k = cli("calibrate --synthetic --out " + (dir / "k").string());
    ASSERT_EQ(k.code, 0) << k.out;
    EXPECT_TRUE(fs::exists(dir / "k" / "calibration.json"));
    expect_all_announced(k, dir / "k");
}

TEST(Cli, ThreadCountDoesNotChangeOutput)
{
    const fs::path a = fresh("t1"), b = fresh("t4");
    ASSERT_EQ(cli("sweep --grid-preset fig6 --models dbn,rss --threads 1 --out " + a.string()).code, 0);
    ASSERT_EQ(cli("sweep --grid-preset fig6 --models dbn,rss --threads 4 --out " + b.string()).code, 0);
    for (const auto& f : files_under(a)) {
        std::ifstream fa(f, std::ios::binary), fb(b / f.filename(), std::ios::binary);
        std::stringstream sa, sb;
        sa << fa.rdbuf();
        sb << fb.rdbuf();
        EXPECT_EQ(sa.str(), sb.str()) << f.filename();
    }
}
