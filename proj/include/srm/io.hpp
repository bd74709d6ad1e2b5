#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "srm/commutation.hpp"
#include "srm/gp.hpp"
#include "srm/motor_model.hpp"
#include "srm/ripple.hpp"
#include "srm/sim.hpp"

namespace srm {

/// Doubles are written with 17 significant digits so that every save/load
/// round-trip reproduces the exact bit pattern.
std::string format_double(double value);

/// Write content to "<path>.tmp" and rename it over path, so a failed run
/// never leaves a partial file behind.
void write_file_atomic(const std::string& path, const std::string& content);

std::string read_file(const std::string& path);

/// Torque-gain model config: JSON with n_teeth and three per-coil harmonic
/// lists (order, amplitude, phase). Unknown fields are rejected.
TorqueGainModel load_motor_config(const std::string& path);
TorqueGainModel parse_motor_config(const std::string& json_text,
                                   const std::string& origin);

struct TableMetadata {
    int n_teeth = 0;
    int n_points = 0;
    int subsamples = 0;
    double beta = 0;
    double sample_period = 0;
    double target = 1;
    double velocity = 0;
    double eq_residual = 0;
    double pg_norm = 0;
    double ripple_norm = 0;
    double power_l1 = 0;
    long iterations = 0;
};

/// Commutation table CSV: '#'-prefixed metadata block, then
/// theta_e,f1,f2,f3 rows at 17 significant digits.
std::string format_table_csv(const CommutationTable& table, const TableMetadata& meta);
void save_table_csv(const std::string& path, const CommutationTable& table,
                    const TableMetadata& meta);
std::pair<CommutationTable, TableMetadata> load_table_csv(const std::string& path);

/// GP commutation model: versioned structured text with the kernel specs,
/// period, shared training angles and per-coil weight vectors for both
/// torque signs. load(save(x)) reproduces predictions bit-exactly.
std::string format_gp_model(const GpCommutation& gp);
void save_gp_model(const std::string& path, const GpCommutation& gp);
GpCommutation load_gp_model(const std::string& path);
GpCommutation parse_gp_model(const std::string& text, const std::string& origin);

/// Substep series CSV (t, r, phi, e, Tstar, T, u1, u2, u3) and the metrics
/// key-value block.
std::string format_sim_csv(const SimResult& result);
std::string format_metrics(const SimMetrics& metrics);

}  // namespace srm
