#include "glmamp/trace_io.hpp"

#include <fstream>
#include <sstream>

#include "glmamp/problem_io.hpp"

namespace glmamp {

nlohmann::json to_json(const IterationRecord& r) {
    nlohmann::json j;
    j["iter"] = r.iter;
    j["x_hat"] = r.x_hat;
    j["tau_x"] = r.tau_x;
    j["p_hat"] = r.p_hat;
    j["tau_p"] = r.tau_p;
    j["z0"] = r.z0;
    j["z_var"] = r.z_var;
    j["y_tilde"] = r.y_tilde;
    j["sigma2_tilde"] = r.sigma2_tilde;
    j["nmse"] = r.nmse ? nlohmann::json(*r.nmse) : nlohmann::json(nullptr);
    j["floor_events"] = r.floor_events;
    return j;
}

void write_trace_jsonl(std::ostream& os, const IterationTrace& trace) {
    for (const auto& record : trace) os << to_json(record).dump() << '\n';
}

void write_trace_jsonl(const std::filesystem::path& path, const IterationTrace& trace) {
    std::ostringstream os;
    write_trace_jsonl(os, trace);
    write_text_atomic(path, os.str());
}

void write_text_atomic(const std::filesystem::path& path, const std::string& text) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os) throw IoError("cannot write " + path.string());
        os << text;
        if (!os) throw IoError("write failed: " + path.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw IoError("cannot move output into place: " + path.string());
    }
}

}  // namespace glmamp
