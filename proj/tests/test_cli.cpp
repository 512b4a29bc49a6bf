#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>

namespace {

const std::string cli = RELUS_CLI_PATH;

struct TempDir {
    std::filesystem::path path;
    TempDir() {
        path = std::filesystem::temp_directory_path() /
               ("relus_cli_" + std::to_string(::getpid()));
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

int run(const std::string& args, const std::string& stdout_path = "/dev/null",
        const std::string& stderr_path = "/dev/null") {
    const std::string cmd = cli + " " + args + " >" + stdout_path + " 2>" + stderr_path;
    const int status = std::system(cmd.c_str());
    REQUIRE(status != -1);
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    out << content;
}

int count_lines(const std::string& text) {
    int lines = 0;
    for (char c : text)
        if (c == '\n') ++lines;
    return lines;
}

}  // namespace

TEST_CASE("missing config file exits 1 and names the file") {
    TempDir dir;
    const std::string err = dir.file("err.txt");
    CHECK(run("train --config missing.cfg", "/dev/null", err) == 1);
    CHECK(read_file(err).find("missing.cfg") != std::string::npos);
}

TEST_CASE("unknown subcommand exits 1") {
    CHECK(run("frobnicate") == 1);
}

TEST_CASE("gen --adversarial writes one row per dimension") {
    TempDir dir;
    const std::string out = dir.file("s1.csv");
    CHECK(run("gen --adversarial --d 3 --out " + out) == 0);
    const std::string csv = read_file(out);
    CHECK(count_lines(csv) == 3);
    CHECK(csv.find("1") != std::string::npos);
}

TEST_CASE("gen separable writes n rows") {
    TempDir dir;
    const std::string out = dir.file("gauss.csv");
    CHECK(run("gen --dist gaussian --d 4 --n 17 --seed 9 --out " + out) == 0);
    CHECK(count_lines(read_file(out)) == 17);
}

TEST_CASE("train, audit, grid, and bounds round-trip") {
    TempDir dir;
    const std::string cfg = dir.file("exp.cfg");
    write_file(cfg,
               "source = adversarial\n"
               "d = 4\n"
               "n = 4\n"
               "k = 2\n"
               "trials = 2\n"
               "variant = vanilla\n"
               "eta = 0.1\n"
               "rho = 0\n"
               "max_passes = 2000\n"
               "audit = true\n"
               "seed = 5\n");

    const std::string trace = dir.file("trace.json");
    const std::string out1 = dir.file("train1.txt");
    CHECK(run("train --config " + cfg + " --out " + trace, out1) == 0);
    CHECK(read_file(out1).find("converged=true") != std::string::npos);

    const std::string audit_out = dir.file("audit.txt");
    CHECK(run("audit --report " + trace + " --omega-norm 2", audit_out) == 0);
    CHECK(read_file(audit_out).find("audit clean") != std::string::npos);

    const std::string grid1 = dir.file("grid1.csv");
    const std::string grid2 = dir.file("grid2.csv");
    CHECK(run("grid --config " + cfg + " --out " + grid1 + " --threads 1") == 0);
    CHECK(run("grid --config " + cfg + " --out " + grid2 + " --threads 4") == 0);
    const std::string g1 = read_file(grid1);
    CHECK(g1.rfind("variant,n,k,", 0) == 0);
    CHECK(count_lines(g1) == 2);  // header + one cell
    // All columns except the trailing wall-clock one must agree across thread counts.
    const std::string g2 = read_file(grid2);
    CHECK(g1.substr(0, g1.rfind(',')) == g2.substr(0, g2.rfind(',')));

    const std::string bounds_out = dir.file("bounds.json");
    CHECK(run("bounds --config " + cfg + " --report " + trace + " --out " + bounds_out) == 0);
    const std::string js = read_file(bounds_out);
    CHECK(js.find("Tk0") != std::string::npos);
    CHECK(js.find("lower_bound") != std::string::npos);
}

TEST_CASE("config error exits 1, bad runtime input exits 2") {
    TempDir dir;
    const std::string cfg = dir.file("bad.cfg");
    write_file(cfg, "source = adversarial\nd = 4\nn = 4\nk = 2\neta = -1\n");
    CHECK(run("train --config " + cfg) == 1);

    const std::string missing_trace = dir.file("none.json");
    CHECK(run("audit --report " + missing_trace) == 2);
}
