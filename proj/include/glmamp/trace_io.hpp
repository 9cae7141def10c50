#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include <json.hpp>

#include "glmamp/engine.hpp"

namespace glmamp {

/// One JSON object per iteration with the fields
/// iter, x_hat, tau_x, p_hat, tau_p, z0, z_var, y_tilde, sigma2_tilde, nmse, floor_events.
nlohmann::json to_json(const IterationRecord& record);
void write_trace_jsonl(std::ostream& os, const IterationTrace& trace);
void write_trace_jsonl(const std::filesystem::path& path, const IterationTrace& trace);

/// Writes `text` to `path` through a temporary file so a failure never leaves
/// a partial output behind.
void write_text_atomic(const std::filesystem::path& path, const std::string& text);

}  // namespace glmamp
