#include "recovgraph/ingest.hpp"

#include "recovgraph/csvio.hpp"
#include "recovgraph/errors.hpp"

#include <cmath>
#include <fstream>
#include <regex>

namespace recovgraph {

Eigen::MatrixXd location_norms(const RawSession& raw) {
    if (!raw.coords.allFinite()) {
        throw DataError("session " + raw.patient_id + "/" + raw.game_id +
                        " instance " + std::to_string(raw.instance) +
                        ": non-finite coordinate value");
    }
    if (raw.prenormed) {
        return raw.coords.cwiseAbs();
    }
    if (raw.coords.cols() % 3 != 0) {
        throw ParseError("coordinate matrix width " + std::to_string(raw.coords.cols()) +
                         " is not a multiple of 3");
    }
    const Eigen::Index q = raw.coords.rows();
    const Eigen::Index s = raw.coords.cols() / 3;
    Eigen::MatrixXd norms(q, s);
    for (Eigen::Index j = 0; j < s; ++j) {
        const auto x = raw.coords.col(3 * j).array();
        const auto y = raw.coords.col(3 * j + 1).array();
        const auto z = raw.coords.col(3 * j + 2).array();
        norms.col(j) = (x * x + y * y + z * z).sqrt().matrix();
    }
    return norms;
}

SessionSeries standardize(const Eigen::MatrixXd& norms) {
    const Eigen::Index q = norms.rows();
    const Eigen::Index s = norms.cols();
    if (q < 3) {
        throw DataError("session too short: " + std::to_string(q) +
                        " frames, need at least 3");
    }
    if (!norms.allFinite()) {
        throw DataError("non-finite value in location series");
    }

    SessionSeries series;
    series.values.resize(q, s);
    series.column_means.resize(s);
    series.column_stds.resize(s);
    series.degenerate.assign(static_cast<std::size_t>(s), 0);

    for (Eigen::Index j = 0; j < s; ++j) {
        const double mean = norms.col(j).sum() / static_cast<double>(q);
        const Eigen::ArrayXd centered = norms.col(j).array() - mean;
        const double var = centered.square().sum() / static_cast<double>(q - 1);
        const double stddev = std::sqrt(var);
        series.column_means[j] = mean;
        series.column_stds[j] = stddev;
        if (stddev <= 0.0) {
            series.degenerate[static_cast<std::size_t>(j)] = 1;
            series.values.col(j).setZero();
        } else {
            series.values.col(j) = (centered / stddev).matrix();
        }
    }
    return series;
}

SessionSeries standardize(const RawSession& raw) {
    SessionSeries series = standardize(location_norms(raw));
    series.patient_id = raw.patient_id;
    series.game_id = raw.game_id;
    series.instance = raw.instance;
    series.joint_names = raw.joint_names;
    return series;
}

bool parse_session_filename(const std::string& filename, std::string& patient,
                            std::string& game, int& instance) {
    // Patient match is non-greedy, so patient ids may not contain "_G".
    static const std::regex pattern(R"(^P(.+?)_G(.+)_J([0-9]+)\.csv$)");
    std::smatch m;
    if (!std::regex_match(filename, m, pattern)) return false;
    patient = m[1].str();
    game = m[2].str();
    instance = static_cast<int>(std::stol(m[3].str()));
    return true;
}

namespace {

// Classifies the header as coordinate triples or a prenormed column set and
// extracts joint names. Throws on anything in between.
struct HeaderLayout {
    std::vector<std::string> joint_names;
    bool prenormed = false;
};

HeaderLayout parse_header(const std::vector<std::string>& cols, const std::string& where) {
    HeaderLayout layout;
    if (cols.empty() || cols[0].empty()) {
        throw ParseError(where + ": empty header row");
    }
    auto ends_with = [](const std::string& s, const char* suffix) {
        const std::size_t n = std::char_traits<char>::length(suffix);
        return s.size() > n && s.compare(s.size() - n, n, suffix) == 0;
    };

    if (ends_with(cols[0], "_r")) {
        layout.prenormed = true;
        for (const auto& c : cols) {
            if (!ends_with(c, "_r")) {
                throw ParseError(where + ": mixed header, expected all columns to end in _r");
            }
            layout.joint_names.push_back(c.substr(0, c.size() - 2));
        }
        return layout;
    }

    if (cols.size() % 3 != 0) {
        throw ParseError(where + ": expected <name>_x,<name>_y,<name>_z triples, got " +
                         std::to_string(cols.size()) + " columns");
    }
    for (std::size_t i = 0; i < cols.size(); i += 3) {
        const std::string& cx = cols[i];
        if (!ends_with(cx, "_x") || !ends_with(cols[i + 1], "_y") || !ends_with(cols[i + 2], "_z")) {
            throw ParseError(where + ": column " + std::to_string(i + 1) +
                             ": expected an _x,_y,_z triple");
        }
        const std::string name = cx.substr(0, cx.size() - 2);
        if (cols[i + 1].substr(0, cols[i + 1].size() - 2) != name ||
            cols[i + 2].substr(0, cols[i + 2].size() - 2) != name) {
            throw ParseError(where + ": inconsistent joint name in triple starting at column " +
                             std::to_string(i + 1));
        }
        layout.joint_names.push_back(name);
    }
    return layout;
}

} // namespace

RawSession read_session_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ParseError("cannot open " + path.string());
    }
    const std::string where = path.filename().string();

    std::string line;
    if (!std::getline(in, line)) {
        throw ParseError(where + ": empty file");
    }
    const HeaderLayout layout = parse_header(csv_split(line), where);
    const std::size_t n_cols = layout.prenormed ? layout.joint_names.size()
                                                : 3 * layout.joint_names.size();

    std::vector<double> data;
    std::size_t n_rows = 0;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        const auto fields = csv_split(line);
        ++n_rows;
        if (fields.size() != n_cols) {
            throw ParseError(where + ": frame " + std::to_string(n_rows) + " has " +
                             std::to_string(fields.size()) + " fields, expected " +
                             std::to_string(n_cols));
        }
        for (const auto& f : fields) {
            const double v = parse_double(f, where + ": frame " + std::to_string(n_rows));
            if (!std::isfinite(v)) {
                throw DataError(where + ": frame " + std::to_string(n_rows) +
                                ": non-finite coordinate");
            }
            data.push_back(v);
        }
    }

    RawSession raw;
    raw.joint_names = layout.joint_names;
    raw.prenormed = layout.prenormed;
    raw.coords.resize(static_cast<Eigen::Index>(n_rows), static_cast<Eigen::Index>(n_cols));
    for (std::size_t r = 0; r < n_rows; ++r) {
        for (std::size_t c = 0; c < n_cols; ++c) {
            raw.coords(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                data[r * n_cols + c];
        }
    }
    parse_session_filename(path.filename().string(), raw.patient_id, raw.game_id, raw.instance);
    return raw;
}

void write_session_csv(const std::filesystem::path& path, const RawSession& raw) {
    std::ofstream out(path);
    if (!out) {
        throw Error("cannot write " + path.string());
    }
    const Eigen::Index s = raw.n_joints();
    for (Eigen::Index j = 0; j < s; ++j) {
        const std::string name = j < static_cast<Eigen::Index>(raw.joint_names.size())
                                     ? raw.joint_names[static_cast<std::size_t>(j)]
                                     : "joint" + std::to_string(j + 1);
        if (j > 0) out << ',';
        if (raw.prenormed) {
            out << name << "_r";
        } else {
            out << name << "_x," << name << "_y," << name << "_z";
        }
    }
    out << '\n';
    for (Eigen::Index r = 0; r < raw.coords.rows(); ++r) {
        for (Eigen::Index c = 0; c < raw.coords.cols(); ++c) {
            if (c > 0) out << ',';
            out << format_double(raw.coords(r, c));
        }
        out << '\n';
    }
    if (!out.good()) {
        throw Error("write failed for " + path.string());
    }
}

} // namespace recovgraph
