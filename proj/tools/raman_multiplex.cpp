#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>

#ifdef RAMAN_HAVE_OPENMP
#include <omp.h>
#endif

#include "CLI11.hpp"
#include "json.hpp"
#include "raman/experiment.hpp"
#include "raman/version.hpp"

namespace {

nlohmann::json read_config(const std::string& path) {
  if (path.empty()) return nlohmann::json::object();
  std::ifstream f(path);
  if (!f) throw raman::ValidationError("cannot read config file '" + path + "'");
  nlohmann::json doc;
  f >> doc;
  return doc;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"batch calculator for parametric beating of a probe field on a prepared"
               " Raman coherence"};
  app.set_version_flag("--version", std::string(raman::kVersion));
  std::string scenario;
  app.add_option("scenario", scenario,
                 "one of propagator-dump, statistics, squeezing, fock, coherent, mixture,"
                 " verify, sweep")
      ->required();
  std::string config_path;
  app.add_option("--config", config_path, "JSON experiment description");
  std::string out_dir;
  app.add_option("--out", out_dir,
                 "output directory (default: $RAMAN_MULTIPLEX_OUT, then ./raman-out)");
  bool strict = false;
  app.add_flag("--strict", strict, "escalate preparation warnings to errors");
  int jobs = 0;
  app.add_option("--jobs", jobs, "worker thread count (0 keeps the runtime default)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  if (out_dir.empty()) {
    const char* env = std::getenv("RAMAN_MULTIPLEX_OUT");
    out_dir = env && *env ? env : "raman-out";
  }
#ifdef RAMAN_HAVE_OPENMP
  if (jobs > 0) omp_set_num_threads(jobs);
#else
  (void)jobs;
#endif

  try {
    nlohmann::json doc = read_config(config_path);
    raman::ExperimentConfig cfg = raman::load_experiment(doc, scenario);
    if (strict) {
      cfg.strict = true;
      cfg.echo["strict"] = true;
    }
    int code = raman::run_to_directory(cfg, out_dir, &std::cout);
    std::cout << "report: " << out_dir << "/report.json" << std::endl;
    return code;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "config error: " << e.what() << std::endl;
    return 1;
  } catch (const raman::ValidationError& e) {
    std::cerr << "config error: " << e.what() << std::endl;
    return 1;
  } catch (const raman::ResourceError& e) {
    std::cerr << "resource error: " << e.what() << std::endl;
    return 2;
  } catch (const raman::IoError& e) {
    std::cerr << "io error: " << e.what() << std::endl;
    return 2;
  } catch (const raman::VerificationError& e) {
    std::cerr << "verification error: " << e.what() << std::endl;
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 2;
  }
}
