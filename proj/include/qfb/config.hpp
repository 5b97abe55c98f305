#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "qfb/ensemble.hpp"

namespace qfb {

/// Names of the built-in scenarios, in figure order.
const std::vector<std::string>& preset_names();

/// Throws ValidationError for an unknown name.
CampaignConfig expand_preset(std::string_view name);

/// Parses the sectioned key-value format:
///
///   preset = fig1_qsr        # optional, top of file only
///   [model]      n_channels eta1 M1 eta2 M2 omega target
///   [controller] kind target alpha beta gamma gamma1 gamma2 epsilon
///   [sde]        dt t_final projection_tol seed log_stride noise_refinement
///   [campaign]   n_traj rho0 out_dir workers classify_tol fit_t_lo fit_t_hi
///                write_trajectories
///
/// Keys override the preset. When controller.target is not given it follows
/// model.target; when gamma2 is not given it follows gamma1 with the sign the
/// target requires. rho0 is a preset name or "entries" followed by 32 reals
/// (re im pairs, row-major). Throws ParseError (with line number) or
/// ValidationError (with key).
CampaignConfig parse_config_text(std::string_view text);
CampaignConfig parse_config(const std::string& path);

/// Full, explicit serialization; parse_config_text(serialize_config(c)) == c.
std::string serialize_config(const CampaignConfig& cfg);

nlohmann::json config_to_json(const CampaignConfig& cfg);

}  // namespace qfb
