// Command-line front end: convergence runs, lemma verification, coefficient summaries.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <sdeconv/sdeconv.hpp>

namespace {

using sdeconv::json;

enum Exit { kOk = 0, kFailed = 1, kConfig = 2, kResource = 3, kWarnings = 4 };

// `key=value` pairs; values are read as JSON when possible, else as strings.
json descriptor_from(const std::string& kind, const std::vector<std::string>& params) {
  json d{{"kind", kind}};
  for (const auto& p : params) {
    const auto eq = p.find('=');
    if (eq == std::string::npos || eq == 0) throw sdeconv::ConfigError("--params", "expected key=value, got '" + p + "'");
    const std::string key = p.substr(0, eq), val = p.substr(eq + 1);
    json v = json::parse(val, nullptr, false);
    d[key] = v.is_discarded() ? json(val) : v;
  }
  return d;
}

void print_coeff(const json& info) {
  std::printf("name              %s\n", info["name"].get<std::string>().c_str());
  std::printf("beta              %.6g\n", info["beta"].get<double>());
  std::printf("kappa             %.6g\n", info["kappa"].get<double>());
  std::printf("sup norm          %.6g\n", info["sup_norm"].get<double>());
  std::printf("holder seminorm   %.6g\n", info["holder_seminorm"].get<double>());
  std::printf("holder norm       %.6g\n", info["holder_norm"].get<double>());
  std::printf("singular set      %s\n", info["singular_set"].get<std::string>().c_str());
  std::printf("C_beta,kappa est  %.6g (certified bound %.6g)\n", info["c_beta_kappa_estimate"].get<double>(),
              info["c_beta_kappa_bound"].get<double>());
  std::printf("in L1             %s\n", info["in_L1"].get<bool>() ? "yes" : "no");
  if (!info["diffusion"].is_null()) {
    const auto& d = info["diffusion"];
    std::printf("ellipticity       [%.6g, %.6g]\n", d["sigma_lower"].get<double>(), d["sigma_upper"].get<double>());
    std::printf("f_sigma witness   %s\n", d["has_witness"].get<bool>() ? "yes" : "none known");
  } else {
    std::printf("ellipticity       not a diffusion coefficient\n");
  }
  std::printf("%s\n", info.dump(2).c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Euler-Maruyama convergence experiments for SDEs with irregular coefficients"};
  app.require_subcommand(1);

  std::string config_path, out_dir, lemma = "all", kind;
  unsigned workers = 1;
  bool strict = false;
  std::vector<std::string> params;

  auto* run = app.add_subcommand("run", "run the coupled convergence experiment");
  run->add_option("--config", config_path, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
  run->add_option("--out", out_dir, "output directory (overrides output_dir)");
  run->add_option("--workers", workers, "worker threads")->check(CLI::Range(1u, 1024u));
  run->add_flag("--strict", strict, "nonzero exit if any estimator warning is raised");

  auto* verify = app.add_subcommand("verify", "run lemma verification checks");
  verify->add_option("--lemma", lemma, "all | 3.1 | 3.2 | 3.4 | 3.5 | 3.6 | yw | certs")
      ->check(CLI::IsMember(sdeconv::verify_selectors()));
  verify->add_option("--config", config_path, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
  verify->add_option("--workers", workers, "worker threads")->check(CLI::Range(1u, 1024u));

  auto* coeff = app.add_subcommand("coeff", "print a coefficient certificate summary");
  coeff->add_option("--kind", kind, "constant | step_sigma | zeta | indicator_interval | piecewise")->required();
  coeff->add_option("--params", params, "key=value parameters (values may be JSON)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      const auto cfg = sdeconv::load_config(config_path);
      const std::string dir = out_dir.empty() ? cfg.output_dir : out_dir;
      if (dir.empty()) throw sdeconv::ConfigError("output_dir", "no output directory (set output_dir or pass --out)");
      const auto rep = sdeconv::run_convergence(cfg, workers);
      sdeconv::write_convergence_outputs(rep, dir);
      std::cout << sdeconv::errors_csv(rep);
      for (const auto& w : rep.errors.warnings) std::cerr << "warning: " << w << "\n";
      if (rep.degenerate) std::cerr << "note: rate fit degenerate: " << rep.degenerate_reason << "\n";
      return strict && !rep.errors.warnings.empty() ? kWarnings : kOk;
    }
    if (*verify) {
      const auto cfg = sdeconv::load_config(config_path);
      const json rep = sdeconv::run_verify(cfg, lemma, workers);
      std::cout << rep.dump(2) << "\n";
      return rep.at("pass").get<bool>() ? kOk : kFailed;
    }
    if (*coeff) {
      print_coeff(sdeconv::coeff_info(descriptor_from(kind, params)));
      return kOk;
    }
  } catch (const sdeconv::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const sdeconv::ResourceError& e) {
    std::cerr << "resource error: " << e.what() << "\n";
    return kResource;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailed;
  }
  return kOk;
}
