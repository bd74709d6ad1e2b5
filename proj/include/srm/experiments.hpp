#pragma once

#include <memory>
#include <string>
#include <vector>

#include "srm/gp.hpp"
#include "srm/io.hpp"
#include "srm/ripple.hpp"
#include "srm/sim.hpp"

namespace srm {

struct ExperimentConfig {
    std::string motor_model_path;
    // synthesis
    int n_points = 150;
    int subsamples = 15;
    double beta = 1000.0;
    double sample_period = 1e-3;
    // gp
    HyperSearchOptions gp;
    // simulation
    std::vector<double> velocities_teeth{0.5, 1, 2, 4, 5, 8, 10, 12, 15, 20};
    int m_sim = 20;
    // baseline torque-sharing function
    TsfKind baseline_kind = TsfKind::sine;
    double baseline_overlap = kTwoPi / 12.0;  // electrical rad
    double baseline_saturation = 3.0;         // A^2/Nm
    // beta sweep
    std::vector<double> sweep_betas{0.1, 0.5, 1, 2, 5, 10, 50, 200, 1000};
    double sweep_velocity_teeth = 8.0;
    // single simulation
    std::string simulate_method = "optimal";
    double simulate_velocity_teeth = 8.0;
    // ripple trace
    double ripple_velocity_teeth = 0.0;  // 0 -> nominal
    double ripple_torque_request = 1.0;

    std::string output_dir = "out";
};

ExperimentConfig load_experiment_config(const std::string& path);
ExperimentConfig parse_experiment_config(const std::string& json_text,
                                         const std::string& origin);

struct SynthOutput {
    CommutationTable table_pos;
    CommutationTable table_neg;
    RippleSolution solution_pos;
    RippleSolution solution_neg;
    std::array<GpFitDiagnostics, 3> gp_diag_pos;
    std::array<GpFitDiagnostics, 3> gp_diag_neg;
    std::shared_ptr<GpCommutation> gp;
    double wall_seconds = 0;
};

/// Solves both torque signs, fits the GPs and writes table.csv,
/// table_neg.csv, gp_model.txt and report.txt into out_dir.
SynthOutput run_synth(const ExperimentConfig& config, const TorqueGainModel& model,
                      const std::string& out_dir);

/// Loads previously synthesized artifacts; runs synth first when missing.
SynthOutput load_or_synth(const ExperimentConfig& config, const TorqueGainModel& model,
                          const std::string& out_dir);

/// Closed-loop sweep over (velocity, commutation) writing sweep_velocity.csv.
void run_sweep_velocity(const ExperimentConfig& config, const TorqueGainModel& model,
                        const std::string& out_dir);

/// Per-beta synthesis plus closed-loop comparison at the sweep velocity,
/// writing sweep_beta.csv.
void run_sweep_beta(const ExperimentConfig& config, const TorqueGainModel& model,
                    const std::string& out_dir);

/// Open-loop ripple traces of the baseline vs the optimal table,
/// writing ripple.csv (N*M + 1 rows).
void run_ripple(const ExperimentConfig& config, const TorqueGainModel& model,
                const std::string& out_dir);

/// One closed-loop run of the configured method writing sim_<method>.csv
/// and sim_<method>_metrics.txt.
void run_simulate(const ExperimentConfig& config, const TorqueGainModel& model,
                  const std::string& out_dir);

/// Shared helper: the configured conventional baseline.
ConventionalTsf make_baseline(const ExperimentConfig& config,
                              const TorqueGainModel& model, TsfKind kind);

}  // namespace srm
