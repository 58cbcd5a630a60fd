// End-to-end tests of the command line binary: exit codes, CSV and
// manifest layout, determinism across reruns and worker counts, config
// files, the seed environment fallback, plots, and dumps.
//
// The binary path arrives in TIMEROBUST_CLI_PATH (set by CTest).  All
// scratch files live under the system temp directory.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"

namespace fs = std::filesystem;

namespace {

std::string cli_path() {
  if (const char* p = std::getenv("TIMEROBUST_CLI_PATH")) return p;
#ifdef TIMEROBUST_CLI_PATH
  return TIMEROBUST_CLI_PATH;
#else
  FAIL("TIMEROBUST_CLI_PATH must point at the binary");
  return "";
#endif
}

const fs::path& scratch_dir() {
  static const fs::path dir = [] {
    const fs::path d = fs::temp_directory_path() / "timerobust_cli_test";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string path_in(const std::string& name) {
  return (scratch_dir() / name).string();
}

int run(const std::string& args, const std::string& stderr_file = "") {
  std::string cmd = "'" + cli_path() + "' " + args + " >/dev/null 2>";
  cmd += stderr_file.empty() ? std::string("/dev/null") : stderr_file;
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE_MESSAGE(in.good(), ("missing file: " + path));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string first_line(const std::string& text) {
  return text.substr(0, text.find('\n'));
}

std::size_t line_count(const std::string& text) {
  std::size_t n = 0;
  for (char c : text)
    if (c == '\n') ++n;
  return n;
}

bool contains(const std::string& hay, const std::string& needle) {
  return hay.find(needle) != std::string::npos;
}

const std::string kRiskArgs =
    "risk --estimator mle --mu 0 --n 10 --reps 50 ";

}  // namespace

TEST_SUITE("exit codes") {
  TEST_CASE("help succeeds, missing subcommand fails") {
    CHECK(run("--help") == 0);
    CHECK(run("risk --help") == 0);
    CHECK(run("") == 2);
    CHECK(run("frobnicate") == 2);
  }

  TEST_CASE("bad ids fail with the menu on stderr") {
    const std::string err = path_in("err.txt");
    CHECK(run("risk --estimator nope --mu 0 --n 10 --reps 50 --out " +
                  path_in("x.csv"),
              err) == 2);
    CHECK(contains(slurp(err), "valid"));
    CHECK(run(kRiskArgs + "--seed 1 --rate bogus --out " + path_in("x.csv")) ==
          2);
  }

  TEST_CASE("validation failures report every problem at once") {
    const std::string err = path_in("err2.txt");
    // Out-of-box mu and a missing --out in one invocation.
    CHECK(run("risk --family bernoulli --estimator mle --mu 2 --n 10 "
              "--reps 50",
              err) == 2);
    const std::string text = slurp(err);
    CHECK(contains(text, "parameter box"));
    CHECK(contains(text, "--out is required"));
  }

  TEST_CASE("selftest runs clean") { CHECK(run("selftest") == 0); }
}

TEST_SUITE("risk output") {
  TEST_CASE("CSV header, row shape, and manifest") {
    const std::string out = path_in("risk.csv");
    REQUIRE(run(kRiskArgs + "--seed 3 --out " + out) == 0);
    const std::string text = slurp(out);
    CHECK(first_line(text) ==
          "functional,family,mu,estimator,rule,rate,n_or_N,mean,se,"
          "conditional_mean,cap_hits,reps,seed,config_digest");
    CHECK(line_count(text) == 2);  // header + one cell
    const std::string row = text.substr(text.find('\n') + 1);
    CHECK(contains(row, "standard,gaussian,0,mle,-,f_loglog,10,"));
    const std::string manifest = slurp(out + ".manifest");
    CHECK(contains(manifest, "version="));
    CHECK(contains(manifest, "rows=1"));
    CHECK(contains(manifest, "seed=3"));
    // The digest in the manifest matches the one in every row.
    const std::size_t dpos = manifest.find("digest=");
    REQUIRE(dpos != std::string::npos);
    const std::string digest = manifest.substr(dpos + 7, 16);
    CHECK(contains(row, digest));
  }

  TEST_CASE("a mu by n grid emits one row per cell") {
    const std::string out = path_in("grid.csv");
    REQUIRE(run("risk --estimator mle --mu-grid 0,1 --n 5,10 --reps 50 "
                "--seed 3 --out " +
                out) == 0);
    CHECK(line_count(slurp(out)) == 5);
    CHECK(contains(slurp(out + ".manifest"), "rows=4"));
  }

  TEST_CASE("a rule switches the functional to weak") {
    const std::string out = path_in("weak.csv");
    REQUIRE(run("risk --estimator posterior_mean --rule fixed:20 --mu 0.5 "
                "--reps 50 --seed 3 --out " +
                out) == 0);
    const std::string text = slurp(out);
    CHECK(contains(text, "weak,gaussian,0.5,posterior_mean,fixed:20,"));
    CHECK(contains(text, ",20,"));  // n_or_N = the rule's horizon
  }

  TEST_CASE("non-finite losses still write output but exit 3") {
    const std::string out = path_in("nf.csv");
    CHECK(run("risk --estimator const:1e200 --mu 0 --n 3 --reps 10 "
              "--seed 1 --out " +
              out) == 3);
    CHECK(contains(slurp(out), "nan"));
  }

  TEST_CASE("an unwritable output path exits 4 and leaves nothing behind") {
    const std::string out = path_in("no_such_dir/out.csv");
    CHECK(run(kRiskArgs + "--seed 3 --out " + out) == 4);
    CHECK_FALSE(fs::exists(out));
    CHECK_FALSE(fs::exists(out + ".tmp"));
  }
}

TEST_SUITE("other subcommands") {
  TEST_CASE("supermartingale-check header") {
    const std::string out = path_in("sm.csv");
    REQUIRE(run("supermartingale-check --mu 0 --checkpoints 1,5 --reps 50 "
                "--seed 2 --out " +
                out) == 0);
    const std::string text = slurp(out);
    CHECK(first_line(text) ==
          "mu,n,mean_Z,se_Z,mean_evalue,se_evalue,reps,seed,config_digest");
    CHECK(line_count(text) == 3);  // one row per checkpoint
  }

  TEST_CASE("adversary-demo header") {
    const std::string out = path_in("adv.csv");
    REQUIRE(run("adversary-demo --estimator posterior_mean "
                "--rule lil:0.1,5,100 --mu 0 --reps 50 --seed 2 --out " +
                out) == 0);
    CHECK(first_line(slurp(out)) ==
          "family,mu,estimator,rule,trigger_rate,cap_rate,mean_tau,"
          "mean_loss_ratio,postcond_rate,reps,seed,config_digest");
  }

  TEST_CASE("dilemma header") {
    const std::string out = path_in("dil.csv");
    REQUIRE(run("dilemma --selector bic --mu-grid 0 --n-grid 10 --reps 50 "
                "--seed 2 --out " +
                out) == 0);
    const std::string text = slurp(out);
    CHECK(first_line(text) ==
          "selector,mu,n,functional,p_select_m1,risk_mean,risk_se,rate,reps,"
          "seed,config_digest");
    CHECK(line_count(text) == 3);  // standard + strong rows for the one cell
  }

  TEST_CASE("plots are SVG documents") {
    const std::string out = path_in("plot.csv");
    const std::string svg = path_in("plot.svg");
    REQUIRE(run("risk --estimator mle --mu 0 --n 5,10,20 --reps 50 --seed 2 "
                "--out " +
                out + " --plot " + svg) == 0);
    CHECK(slurp(svg).rfind("<svg", 0) == 0);
  }

  TEST_CASE("dumps list one record per replication, risk only") {
    const std::string out = path_in("dump.csv");
    const std::string dump = path_in("dump_rows.csv");
    REQUIRE(run(kRiskArgs + "--seed 2 --out " + out + " --dump " + dump) == 0);
    const std::string text = slurp(dump);
    CHECK(first_line(text) ==
          "row,functional,mu,n_or_N,rep,loss,tau,triggered,cap");
    CHECK(line_count(text) == 51);  // header + one line per replication
    CHECK(run("dilemma --selector bic --mu-grid 0 --n-grid 10 --reps 50 "
              "--seed 2 --out " +
              path_in("d2.csv") + " --dump " + path_in("d2_rows.csv")) == 2);
  }
}

TEST_SUITE("determinism") {
  TEST_CASE("identical invocations produce identical bytes") {
    const std::string a = path_in("det_a.csv");
    const std::string b = path_in("det_b.csv");
    REQUIRE(run(kRiskArgs + "--seed 9 --out " + a) == 0);
    REQUIRE(run(kRiskArgs + "--seed 9 --out " + b) == 0);
    CHECK(slurp(a) == slurp(b));
  }

  TEST_CASE("worker count changes neither the CSV nor its digest") {
    const std::string a = path_in("w1.csv");
    const std::string b = path_in("w8.csv");
    const std::string args =
        "risk --estimator posterior_mean --rule lil:0.1,27,500 --mu 0.5 "
        "--reps 5000 --seed 7 ";
    REQUIRE(run(args + "--workers 1 --out " + a) == 0);
    REQUIRE(run(args + "--workers 8 --out " + b) == 0);
    CHECK(slurp(a) == slurp(b));
  }
}

TEST_SUITE("config and environment") {
  TEST_CASE("config files stand in for flags") {
    const std::string cfg = path_in("run.cfg");
    {
      std::ofstream out(cfg);
      out << "# flat key=value, flag names without the dashes\n"
          << "estimator = mle\n"
          << "mu = 0\n"
          << "n = 10\n"
          << "reps = 50\n"
          << "seed = 5\n";
    }
    const std::string a = path_in("cfg_a.csv");
    const std::string b = path_in("cfg_b.csv");
    REQUIRE(run("risk --config " + cfg + " --out " + a) == 0);
    REQUIRE(run(kRiskArgs + "--seed 5 --out " + b) == 0);
    CHECK(slurp(a) == slurp(b));
  }

  TEST_CASE("explicit flags beat config values") {
    const std::string cfg = path_in("run.cfg");  // seed = 5 from above
    const std::string a = path_in("ovr_a.csv");
    const std::string b = path_in("ovr_b.csv");
    REQUIRE(run("risk --config " + cfg + " --seed 7 --out " + a) == 0);
    REQUIRE(run(kRiskArgs + "--seed 7 --out " + b) == 0);
    CHECK(slurp(a) == slurp(b));
  }

  TEST_CASE("unknown config keys are rejected") {
    const std::string cfg = path_in("bad.cfg");
    {
      std::ofstream out(cfg);
      out << "frobnication = 9\n";
    }
    CHECK(run("risk --config " + cfg + " --out " + path_in("x.csv")) == 2);
  }

  TEST_CASE("the seed environment variable is the last fallback") {
    const std::string a = path_in("env_a.csv");
    const std::string b = path_in("env_b.csv");
    setenv("TIMEROBUST_SEED", "9", 1);
    REQUIRE(run(kRiskArgs + "--out " + a) == 0);
    unsetenv("TIMEROBUST_SEED");
    REQUIRE(run(kRiskArgs + "--seed 9 --out " + b) == 0);
    CHECK(slurp(a) == slurp(b));
    // A flag wins over the environment; garbage in the variable fails fast.
    setenv("TIMEROBUST_SEED", "17", 1);
    const std::string c = path_in("env_c.csv");
    REQUIRE(run(kRiskArgs + "--seed 9 --out " + c) == 0);
    CHECK(slurp(c) == slurp(b));
    setenv("TIMEROBUST_SEED", "notanumber", 1);
    CHECK(run(kRiskArgs + "--out " + path_in("env_d.csv")) == 2);
    unsetenv("TIMEROBUST_SEED");
  }
}
