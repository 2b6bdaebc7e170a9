#pragma once

// File formats shared by the CLI and tests.
//
// Tensor file ("CTV1"): 4 magic bytes, then h, w, s as little-endian u32,
// then h*w*s little-endian IEEE-754 doubles in Tensor3 layout order. Total
// length 16 + 8*h*w*s bytes.
//
// Run config: a JSON object with optional sections "solver", "synthetic"
// and "phase". Unknown keys anywhere are rejected.

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "ctvrpca/analysis.hpp"
#include "ctvrpca/solvers.hpp"
#include "ctvrpca/synth.hpp"
#include "ctvrpca/tensor.hpp"

namespace ctvrpca::io {

using Json = nlohmann::json;

inline constexpr std::string_view kTensorMagic = "CTV1";
inline constexpr std::string_view kDiagnosticsSchema = "ctvrpca.diagnostics.v1";
inline constexpr std::string_view kPhaseSchema = "ctvrpca.phase.v1";

std::string encode_tensor(const Tensor3& t);
/// Throws FormatError on bad magic, short header or wrong payload length.
Tensor3 decode_tensor(std::string_view bytes);
void write_tensor(const std::filesystem::path& path, const Tensor3& t);
Tensor3 read_tensor(const std::filesystem::path& path);

struct RunConfig {
  SolverConfig solver;
  SyntheticSpec synthetic;
  /// Axes, trials, threshold, seed and solver list; `solver` and `synthetic`
  /// above are copied into it by phase_config().
  PhaseConfig phase = PhaseConfig::desk_scale();

  PhaseConfig phase_config() const;
};

/// Validates types, domains and key names; throws ConfigError.
RunConfig parse_run_config(const Json& doc);
RunConfig load_run_config(const std::filesystem::path& path);
Json to_json(const RunConfig& cfg);

/// Header: iter,chg_m,chg_x,chg_s,chg,rel_err_m,rel_err_x,rel_err_s,
/// objective,feas_g1,feas_g2,feas_g3,mu
void write_diagnostics_csv(std::ostream& os,
                           const std::vector<IterationDiagnostics>& diags);

/// Long format, one row per (cell, trial, solver). Header:
/// rank_index,rho_index,rank_ratio,rank,rho_s,trial,seed,solver,success,
/// rel_err,iterations
void write_phase_csv(std::ostream& os, const PhaseGrid& grid);

Json phase_summary_json(const PhaseGrid& grid);
Json incoherence_json(const IncoherenceReport& rep);
/// Generating spec plus the sorted support indices.
Json instance_sidecar_json(const SyntheticInstance& inst);
Json decomposition_summary_json(const DecompositionResult& res,
                                SolverKind solver, double objective);

/// 17 significant digits ("%.17g"), enough to round-trip; non-finite values print as
/// nan / inf / -inf.
std::string format_double(double v);

void write_text(const std::filesystem::path& path, std::string_view text);

}  // namespace ctvrpca::io
