#ifndef SHEARFLOW_IO_HPP
#define SHEARFLOW_IO_HPP

#include <optional>
#include <string>

#include <json.hpp>

#include "shearflow/attractor.hpp"
#include "shearflow/basis.hpp"
#include "shearflow/constants.hpp"
#include "shearflow/error.hpp"
#include "shearflow/operators.hpp"
#include "shearflow/simulate.hpp"

namespace shearflow {

/// trajectory.csv: t, norm_H, norm_V, vprime_dual, energy_slack. The header
/// carries a generation timestamp unless with_timestamp is false (the
/// comparison mode used for reproducibility checks).
void write_trajectory_csv(const std::string& path, const Trajectory& traj, bool with_timestamp);

/// energy.csv: t, sigma, tol, violation flag.
void write_energy_csv(const std::string& path, const Trajectory& traj, const ConstantsAudit& audit,
                      double tol_coeff);

nlohmann::json audit_to_json(const ConstantsAudit& audit);
nlohmann::json certificate_to_json(const PotentialCertificate& cert);
nlohmann::json stability_to_json(const StabilityReport& report);
nlohmann::json attractor_to_json(const AttractorReport& report);
nlohmann::json error_to_json(const Error& err);

void write_text(const std::string& path, const std::string& text);

/// sections.csv: member/sample indices, norms, then the coefficient vector.
void write_sections_csv(const std::string& path, const AttractorReport& report, int per_member);

/// Minimal static SVG line plot of the H/V norm channels.
void write_norm_plot_svg(const std::string& path, const Trajectory& traj);

// Self-describing binary checkpoint: magic, version, config hash, step, a.
void write_checkpoint(const std::string& path, std::uint64_t config_hash, long step,
                      const Eigen::VectorXd& a);
struct Checkpoint {
    std::uint64_t config_hash = 0;
    long step = 0;
    Eigen::VectorXd a;
};
std::optional<Checkpoint> read_checkpoint(const std::string& path);

/// Binary basis + operator cache keyed by the content hash; a key mismatch
/// returns nullopt so the caller rebuilds.
void save_operator_cache(const std::string& path, const DivFreeBasis& basis,
                         const OperatorSet& ops);
struct OperatorCache {
    Eigen::MatrixXd mass, stiffness, rotrot, boundary_gram, trace_normal;
    Eigen::VectorXd f_vector;
    double f_dual_norm = 0.0;
};
std::optional<OperatorCache> load_operator_cache(const std::string& path,
                                                 std::uint64_t basis_hash, std::uint64_t ops_key);
std::uint64_t operator_cache_key(const DivFreeBasis& basis, double nu, const LiftField& lift);

}  // namespace shearflow

#endif
