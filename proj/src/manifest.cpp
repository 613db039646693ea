#include "recovgraph/manifest.hpp"

#include "recovgraph/errors.hpp"
#include "recovgraph/ingest.hpp"

#include <json.hpp>

#include <fstream>

namespace recovgraph {

Manifest load_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ParseError("cannot open " + path.string());
    }
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
    if (!doc.contains("sessions") || !doc["sessions"].is_array()) {
        throw ParseError(path.string() + ": missing \"sessions\" array");
    }

    const std::filesystem::path base = path.parent_path();
    Manifest manifest;
    for (std::size_t i = 0; i < doc["sessions"].size(); ++i) {
        const auto& node = doc["sessions"][i];
        const std::string where = path.string() + ": sessions[" + std::to_string(i) + "]";
        if (!node.contains("path")) {
            throw ParseError(where + ": missing \"path\"");
        }
        SessionRef ref;
        std::filesystem::path file = node["path"].get<std::string>();
        ref.path = file.is_absolute() ? file : base / file;

        if (node.contains("patient_id")) ref.patient_id = node["patient_id"].get<std::string>();
        if (node.contains("game_id")) ref.game_id = node["game_id"].get<std::string>();
        if (node.contains("instance")) ref.instance = node["instance"].get<int>();
        if (node.contains("platform_points") && !node["platform_points"].is_null()) {
            ref.platform_points = node["platform_points"].get<int>();
        }

        if (ref.patient_id.empty() || ref.game_id.empty() || ref.instance <= 0) {
            std::string patient, game;
            int instance = 0;
            if (parse_session_filename(ref.path.filename().string(), patient, game, instance)) {
                if (ref.patient_id.empty()) ref.patient_id = patient;
                if (ref.game_id.empty()) ref.game_id = game;
                if (ref.instance <= 0) ref.instance = instance;
            }
        }
        if (ref.patient_id.empty() || ref.game_id.empty() || ref.instance <= 0) {
            throw ParseError(where + ": metadata incomplete and not derivable from the file name");
        }
        manifest.sessions.push_back(std::move(ref));
    }
    return manifest;
}

void save_manifest(const std::filesystem::path& path, const Manifest& manifest) {
    nlohmann::json sessions = nlohmann::json::array();
    for (const auto& ref : manifest.sessions) {
        nlohmann::json node;
        node["path"] = ref.path.generic_string();
        node["patient_id"] = ref.patient_id;
        node["game_id"] = ref.game_id;
        node["instance"] = ref.instance;
        if (ref.platform_points) node["platform_points"] = *ref.platform_points;
        sessions.push_back(std::move(node));
    }
    nlohmann::json doc;
    doc["sessions"] = std::move(sessions);

    std::ofstream out(path);
    if (!out) {
        throw Error("cannot write " + path.string());
    }
    out << doc.dump(2) << '\n';
    if (!out.good()) {
        throw Error("write failed for " + path.string());
    }
}

Manifest manifest_from_files(std::span<const std::filesystem::path> files) {
    Manifest manifest;
    for (const auto& file : files) {
        SessionRef ref;
        ref.path = file;
        if (!parse_session_filename(file.filename().string(), ref.patient_id, ref.game_id,
                                    ref.instance)) {
            throw ParseError(file.string() +
                             ": file name does not match P<patient>_G<game>_J<instance>.csv; "
                             "use a manifest to supply metadata");
        }
        manifest.sessions.push_back(std::move(ref));
    }
    return manifest;
}

} // namespace recovgraph
