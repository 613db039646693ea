#ifndef RECOVGRAPH_MANIFEST_HPP
#define RECOVGRAPH_MANIFEST_HPP

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace recovgraph {

/// One session file plus its metadata.
struct SessionRef {
    std::filesystem::path path;  // resolved against the manifest directory
    std::string patient_id;
    std::string game_id;
    int instance = 0;
    std::optional<int> platform_points;
};

struct Manifest {
    std::vector<SessionRef> sessions;
};

/// Reads a manifest JSON: {"sessions": [{"path": ..., "patient_id": ...,
/// "game_id": ..., "instance": ..., "platform_points": ...}, ...]}.
/// Relative session paths are resolved against the manifest's directory.
/// Entries may omit the metadata fields when the file name encodes them.
Manifest load_manifest(const std::filesystem::path& path);

void save_manifest(const std::filesystem::path& path, const Manifest& manifest);

/// Builds a manifest from bare session files, metadata taken from
/// P<patient>_G<game>_J<instance>.csv names. Throws ParseError for names
/// that do not match.
Manifest manifest_from_files(std::span<const std::filesystem::path> files);

} // namespace recovgraph

#endif
