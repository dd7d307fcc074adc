#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>
#include <sys/wait.h>

#include <doctest.h>

namespace fs = std::filesystem;

namespace
{

struct Run {
    int code = -1;
    std::string out;
};

Run run(const std::string &args)
{
    const auto log = fs::temp_directory_path() / "hem_cli_test.log";
    const std::string cmd = std::string(HEM_CLI_PATH) + " " + args + " > " + log.string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    Run r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    std::ifstream in(log);
    std::stringstream ss;
    ss << in.rdbuf();
    r.out = ss.str();
    return r;
}

std::string slurp(const fs::path &p)
{
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Lines that are not part of the leading manifest block.
std::vector<std::string> body(const std::string &text)
{
    std::vector<std::string> lines;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (!line.starts_with("#")) {
            lines.push_back(line);
        }
    }
    return lines;
}

class TempDir
{
public:
    TempDir() : m_path(fs::temp_directory_path() / ("hem_cli_" + std::to_string(::getpid())))
    {
        fs::create_directories(m_path);
    }
    ~TempDir()
    {
        std::error_code ec;
        fs::remove_all(m_path, ec);
    }
    std::string operator/(const std::string &name) const
    {
        return (m_path / name).string();
    }

private:
    fs::path m_path;
};

} // namespace

TEST_SUITE("cli")
{
    TEST_CASE("compile a trivial map quickly")
    {
        TempDir dir;
        const auto t0 = std::chrono::steady_clock::now();
        const auto r = run("compile --epsilon 0 --gamma 0 --N 2 --M 4 --out " + dir / "t.hemmap");
        const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        REQUIRE(r.code == 0);
        CHECK(sec < 1.0);
        const auto text = slurp(dir / "t.hemmap");
        CHECK(text.starts_with("HEMMAP 1"));
        int submaps = 0;
        for (const auto &l : body(text)) {
            submaps += l.starts_with("submap ") ? 1 : 0;
        }
        CHECK(submaps == 4);
        const auto manifest = slurp(dir / "t.hemmap.manifest");
        CHECK(manifest.find("# version=") != std::string::npos);
        CHECK(manifest.find("# map_hash=") != std::string::npos);
        CHECK(manifest.find("# epsilon=0") != std::string::npos);
    }

    TEST_CASE("compile summary of the defaults")
    {
        TempDir dir;
        const auto r = run("compile --out " + dir / "d.hemmap");
        REQUIRE(r.code == 0);
        CHECK(r.out.find("20578/8396") != std::string::npos);
    }

    TEST_CASE("check passes, and fails against a tiny bound")
    {
        TempDir dir;
        REQUIRE(run("compile --N 10 --M 20 --precision double --out " + dir / "m.hemmap").code == 0);
        const auto ok = run("check --map " + dir / "m.hemmap" + " --grid-L 4 --precision double --bound 1e-3 --out "
                            + dir / "g.csv");
        CHECK(ok.code == 0);
        const auto csv = slurp(dir / "g.csv");
        CHECK(csv.starts_with("# "));
        const auto rows = body(csv);
        REQUIRE(rows.size() == 26);
        CHECK(rows[0] == "i,j,x0,y0,e_x,e_y");
        const auto bad = run("check --map " + dir / "m.hemmap" + " --grid-L 4 --precision double --bound 1e-300");
        CHECK(bad.code == 2);
    }

    TEST_CASE("mc with one initial condition")
    {
        TempDir dir;
        REQUIRE(run("compile --N 10 --M 20 --out " + dir / "m.hemmap").code == 0);
        const auto r = run("mc --map " + dir / "m.hemmap" + " --ics 1 --npre 200 --nwin 64 --per-ic " + dir / "ic.csv"
                           + " --out " + dir / "p.csv");
        REQUIRE(r.code == 0);
        const auto ic = slurp(dir / "ic.csv");
        CHECK(ic.find("# seed=1") != std::string::npos);
        CHECK(ic.find("# map_hash=") != std::string::npos);
        const auto rows = body(ic);
        REQUIRE(rows.size() == 2);
        CHECK(rows[0] == "index,x0,y0,label,rho");
        const auto table = body(slurp(dir / "p.csv"));
        CHECK(table.size() == 2);
        // Same seed, same output.
        REQUIRE(run("mc --map " + dir / "m.hemmap" + " --ics 1 --npre 200 --nwin 64 --per-ic " + dir / "ic2.csv").code
                == 0);
        CHECK(body(slurp(dir / "ic2.csv")) == rows);
    }

    TEST_CASE("analysis commands")
    {
        const auto gp = run("gp --epsilon 1.8e-4");
        CHECK(gp.code == 0);
        CHECK(gp.out.find("7.69") != std::string::npos);
        const auto th = run("thresholds");
        CHECK(th.code == 0);
        CHECK(th.out.find("1/2") != std::string::npos);
        CHECK(th.out.find("13/4") != std::string::npos);
        CHECK(th.out.find("1.957e-03*") != std::string::npos);
        CHECK(th.out.find("1.1956e-3") != std::string::npos);
    }

    TEST_CASE("rejected input")
    {
        CHECK(run("compile --bogus 1 --out /tmp/x").code == 1);
        CHECK(run("compile --e 1.5 --out /tmp/x").code == 1);
        CHECK(run("thresholds --epsilon -1").code == 1);
        CHECK(run("check --map /nonexistent/map").code == 1);
        CHECK(run("").code == 1);
        TempDir dir;
        {
            std::ofstream(dir / "junk.hemmap") << "not a map\n";
        }
        CHECK(run("check --map " + dir / "junk.hemmap").code == 1);
        CHECK(run("gp --epsilon 1e-3 --p 2").code == 1);
    }

    TEST_CASE("resource errors exit with 3")
    {
        TempDir dir;
        REQUIRE(run("compile --N 10 --M 20 --out " + dir / "m.hemmap").code == 0);
        const auto r = run("omega-prime --map " + dir / "m.hemmap" + " --n 2000 --block 200 --y0 3");
        CHECK(r.code == 3);
    }
}
