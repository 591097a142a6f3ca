// betasel: fit, select, simulate, and diagnose varying-dispersion beta
// regression models from the command line.

#include <CLI11.hpp>

#include "betasel/betasel.hpp"

namespace {

void add_data_options(CLI::App* cmd, betasel::run_config& config) {
  cmd->add_option("--data", config.data_path, "input CSV path")->required();
  cmd->add_option("--y", config.y_column, "response column")->required();
  cmd->add_option("--y-denom", config.y_denominator,
                  "denominator column (response becomes y / denom)");
  cmd->add_option("--derive", config.derive,
                  "derived covariate, name=colA*colB or name=colA^2 (repeatable)");
}

void add_common_options(CLI::App* cmd, betasel::run_config& config) {
  cmd->add_option("--w", config.W, "bootstrap replicates per criterion");
  cmd->add_option("--seed", config.seed, "master seed");
  cmd->add_option("--threads", config.threads,
                  "worker threads (0 = BETASEL_THREADS env var, then 1)");
  cmd->add_option("--out", config.output, "report path (default: stdout)");
  cmd->add_option("--format", config.format, "json|csv")
      ->check(CLI::IsMember({"json", "csv"}));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"model selection for varying-dispersion beta regressions"};
  app.require_subcommand(1);

  betasel::run_config config;

  auto* fit_cmd = app.add_subcommand("fit", "fit one model by maximum likelihood");
  add_data_options(fit_cmd, config);
  fit_cmd->add_option("--mean-cols", config.mean_columns, "mean submodel columns")
      ->delimiter(',');
  fit_cmd->add_option("--disp-cols", config.disp_columns, "dispersion submodel columns")
      ->delimiter(',');
  fit_cmd->add_option("--mean-link", config.mean_link, "mean link");
  fit_cmd->add_option("--disp-link", config.disp_link, "dispersion link");
  fit_cmd->add_option("--criteria", config.criteria, "criteria to report (or 'all')")
      ->delimiter(',');
  fit_cmd->add_flag("--diagnostics", config.diagnostics,
                    "add pseudo-R2 and r_w2 residuals (csv format: envelope table)");
  fit_cmd->add_option("--envelope-sims", config.envelope_sims,
                      "simulations for the csv envelope");
  add_common_options(fit_cmd, config);

  auto* select_cmd = app.add_subcommand("select", "search candidate submodels");
  add_data_options(select_cmd, config);
  select_cmd->add_option("--mean-pool", config.mean_columns, "mean candidate columns")
      ->delimiter(',');
  select_cmd->add_option("--disp-pool", config.disp_columns,
                         "dispersion candidate columns")
      ->delimiter(',');
  select_cmd->add_option("--mean-link", config.mean_link, "mean link");
  select_cmd->add_option("--disp-link", config.disp_link, "dispersion link");
  select_cmd
      ->add_option("--scheme", config.scheme, "joint|mean_only|disp_only|two-step")
      ->default_val("two_step");
  select_cmd->add_option("--nesting", config.nesting, "sequential|exhaustive")
      ->default_val("exhaustive");
  select_cmd->add_option("--criterion", config.criteria, "selection criterion")
      ->required();
  add_common_options(select_cmd, config);

  auto* sim_cmd = app.add_subcommand("simulate", "selection-frequency experiment");
  sim_cmd->add_option("--dgp", config.dgp, "model5|model6|model7|model8")
      ->default_val("model7");
  sim_cmd->add_option("--n", config.n, "sample size")->default_val(40);
  sim_cmd->add_option("--reps", config.reps, "Monte Carlo replications")
      ->default_val(200);
  sim_cmd->add_option("--mode", config.sim_mode, "joint|mean_only|disp_only")
      ->default_val("mean_only");
  sim_cmd->add_option("--criteria", config.criteria, "criteria list or 'all'")
      ->delimiter(',');
  add_common_options(sim_cmd, config);

  auto* env_cmd = app.add_subcommand("envelope", "simulated envelope for r_w2");
  add_data_options(env_cmd, config);
  env_cmd->add_option("--mean-cols", config.mean_columns, "mean submodel columns")
      ->delimiter(',');
  env_cmd->add_option("--disp-cols", config.disp_columns, "dispersion submodel columns")
      ->delimiter(',');
  env_cmd->add_option("--mean-link", config.mean_link, "mean link");
  env_cmd->add_option("--disp-link", config.disp_link, "dispersion link");
  env_cmd->add_option("--envelope-sims", config.envelope_sims, "simulated datasets")
      ->default_val(100);
  add_common_options(env_cmd, config);
  env_cmd->get_option("--format")->default_val("csv");

  CLI11_PARSE(app, argc, argv);

  if (fit_cmd->parsed()) config.command = betasel::run_command::fit;
  if (select_cmd->parsed()) config.command = betasel::run_command::select;
  if (sim_cmd->parsed()) config.command = betasel::run_command::simulate;
  if (env_cmd->parsed()) config.command = betasel::run_command::envelope;

  return betasel::run(config);
}
