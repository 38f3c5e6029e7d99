#pragma once

#include <string>
#include <vector>

#include "homog/config.hpp"
#include "homog/report.hpp"

namespace homog {

struct ExperimentInfo {
    std::string name;
    std::string description;
    std::vector<std::string> criteria;
};

const std::vector<ExperimentInfo>& experiment_registry();

/// tuned per-experiment defaults (ladders, budgets); file config overrides
ExperimentConfig default_experiment_config(const std::string& name);

/// dispatch on cfg.name; throws for unknown experiments
ExperimentReport run_experiment(const ExperimentConfig& cfg);

ExperimentReport exp_corrector(const ExperimentConfig& cfg);
ExperimentReport exp_field_clt(const ExperimentConfig& cfg);
ExperimentReport exp_diffusion_homog(const ExperimentConfig& cfg);
ExperimentReport exp_h_eps(const ExperimentConfig& cfg);
ExperimentReport exp_exponent_identity(const ExperimentConfig& cfg);
ExperimentReport exp_joint_xy(const ExperimentConfig& cfg);
ExperimentReport exp_main(const ExperimentConfig& cfg);
ExperimentReport exp_fdd(const ExperimentConfig& cfg);
ExperimentReport exp_spde(const ExperimentConfig& cfg);
ExperimentReport exp_xi_diag(const ExperimentConfig& cfg);

}  // namespace homog
