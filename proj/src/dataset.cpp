#include "sqn/dataset.hpp"

#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>

namespace sqn {

namespace {

constexpr char kBinaryMagic[4] = {'S', 'Q', 'N', 'D'};
constexpr const char* kTextMagic = "#SQND-TEXT";

template <typename T>
void write_pod(std::ostream& os, const T& v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
void read_pod(std::istream& is, T& v, const char* what) {
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!is)
        throw DatasetError(DatasetErrorKind::Truncated,
                           std::string("dataset: truncated while reading ") + what);
}

template <typename T>
void write_column(std::ostream& os, const std::vector<T>& column) {
    os.write(reinterpret_cast<const char*>(column.data()),
             static_cast<std::streamsize>(column.size() * sizeof(T)));
}

template <typename T>
void read_column(std::istream& is, std::vector<T>& column, std::size_t count, const char* what,
                 std::size_t found_hint) {
    column.resize(count);
    is.read(reinterpret_cast<char*>(column.data()),
            static_cast<std::streamsize>(count * sizeof(T)));
    if (!is) {
        const std::size_t got = static_cast<std::size_t>(is.gcount()) / sizeof(T);
        std::ostringstream msg;
        msg << "dataset: truncated " << what << " column; expected " << count << " records, found "
            << (found_hint ? found_hint : got);
        throw DatasetError(DatasetErrorKind::Truncated, msg.str());
    }
}

}  // namespace

nlohmann::json DatasetHeader::to_json() const {
    nlohmann::json j;
    j["format_version"] = format_version;
    j["beam"] = beam;
    j["technique"] = technique;
    j["axis"] = {{"name", axis_name}, {"grid", axis_grid}};
    j["per_setting_counts"] = per_setting_counts;
    j["seed"] = seed;
    j["sql_normalization"] = sql_normalization;
    j["state"] = state;
    j["demod"] = demod;
    j["filter_taps"] = filter_taps;
    j["config_digest"] = config_digest;
    return j;
}

DatasetHeader DatasetHeader::from_json(const nlohmann::json& j) {
    DatasetHeader h;
    try {
        h.format_version = j.at("format_version").get<int>();
        h.beam = j.at("beam").get<std::string>();
        h.technique = j.at("technique").get<std::string>();
        h.axis_name = j.at("axis").at("name").get<std::string>();
        h.axis_grid = j.at("axis").at("grid").get<std::vector<double>>();
        h.per_setting_counts = j.at("per_setting_counts").get<std::vector<std::uint64_t>>();
        h.seed = j.at("seed").get<std::uint64_t>();
        h.sql_normalization = j.at("sql_normalization").get<double>();
        h.state = j.value("state", nlohmann::json());
        h.demod = j.value("demod", nlohmann::json());
        h.filter_taps = j.value("filter_taps", std::vector<double>{});
        h.config_digest = j.value("config_digest", std::string{});
    } catch (const nlohmann::json::exception& e) {
        throw DatasetError(DatasetErrorKind::Malformed,
                           std::string("dataset: malformed header: ") + e.what());
    }
    return h;
}

void Dataset::validate() const {
    if (setting_index.size() != value.size() || sample_index.size() != value.size())
        throw DatasetError(DatasetErrorKind::CountMismatch, "dataset: column lengths disagree");
    std::uint64_t declared = 0;
    for (std::uint64_t c : header.per_setting_counts)
        declared += c;
    if (declared != value.size()) {
        std::ostringstream msg;
        msg << "dataset: header declares " << declared << " records but " << value.size()
            << " are present";
        throw DatasetError(DatasetErrorKind::CountMismatch, msg.str());
    }
    if (header.per_setting_counts.size() != header.axis_grid.size() &&
        !(header.axis_grid.empty() && header.per_setting_counts.size() == 1)) {
        throw DatasetError(DatasetErrorKind::CountMismatch,
                           "dataset: axis grid and per-setting counts disagree");
    }
}

void write_dataset(const Dataset& dataset, const std::filesystem::path& path,
                   DatasetFormat format) {
    dataset.validate();
    std::ofstream os(path, std::ios::binary);
    if (!os)
        throw std::runtime_error("write_dataset: cannot open " + path.string());

    if (format == DatasetFormat::Binary) {
        os.write(kBinaryMagic, sizeof(kBinaryMagic));
        write_pod<std::uint32_t>(os, kDatasetFormatVersion);
        const std::string header = dataset.header.to_json().dump();
        write_pod<std::uint64_t>(os, header.size());
        os.write(header.data(), static_cast<std::streamsize>(header.size()));
        write_pod<std::uint64_t>(os, dataset.value.size());
        write_column(os, dataset.setting_index);
        write_column(os, dataset.sample_index);
        write_column(os, dataset.value);
    } else {
        os << kTextMagic << " v" << kDatasetFormatVersion << "\n";
        os << "#header " << dataset.header.to_json().dump() << "\n";
        os << "#records " << dataset.value.size() << "\n";
        char buf[64];
        for (std::size_t i = 0; i < dataset.value.size(); ++i) {
            std::snprintf(buf, sizeof(buf), "%.17g", dataset.value[i]);
            os << dataset.setting_index[i] << " " << dataset.sample_index[i] << " " << buf << "\n";
        }
    }
    if (!os)
        throw std::runtime_error("write_dataset: write failed for " + path.string());
}

namespace {

Dataset read_binary(std::istream& is) {
    char magic[4];
    is.read(magic, 4);
    std::uint32_t version = 0;
    read_pod(is, version, "version");
    if (version != static_cast<std::uint32_t>(kDatasetFormatVersion)) {
        std::ostringstream msg;
        msg << "dataset: format version " << version << " unsupported (expected "
            << kDatasetFormatVersion << ")";
        throw DatasetError(DatasetErrorKind::VersionMismatch, msg.str());
    }
    std::uint64_t header_len = 0;
    read_pod(is, header_len, "header length");
    std::string header_text(header_len, '\0');
    is.read(header_text.data(), static_cast<std::streamsize>(header_len));
    if (!is)
        throw DatasetError(DatasetErrorKind::Truncated, "dataset: truncated header");

    Dataset dataset;
    nlohmann::json parsed = nlohmann::json::parse(header_text, nullptr, false);
    if (parsed.is_discarded())
        throw DatasetError(DatasetErrorKind::Malformed, "dataset: header is not valid JSON");
    dataset.header = DatasetHeader::from_json(parsed);

    std::uint64_t count = 0;
    read_pod(is, count, "record count");
    read_column(is, dataset.setting_index, count, "setting-index", 0);
    read_column(is, dataset.sample_index, count, "sample-index", 0);
    read_column(is, dataset.value, count, "value", 0);
    dataset.validate();
    return dataset;
}

Dataset read_text(std::istream& is) {
    std::string line;
    std::getline(is, line);  // magic line already sniffed
    if (line.rfind(kTextMagic, 0) != 0)
        throw DatasetError(DatasetErrorKind::Malformed, "dataset: bad text magic");
    const std::string version_tag = " v" + std::to_string(kDatasetFormatVersion);
    if (line.find(version_tag) == std::string::npos)
        throw DatasetError(DatasetErrorKind::VersionMismatch,
                           "dataset: unsupported text format version in '" + line + "'");

    Dataset dataset;
    if (!std::getline(is, line) || line.rfind("#header ", 0) != 0)
        throw DatasetError(DatasetErrorKind::Malformed, "dataset: missing #header line");
    nlohmann::json parsed = nlohmann::json::parse(line.substr(8), nullptr, false);
    if (parsed.is_discarded())
        throw DatasetError(DatasetErrorKind::Malformed, "dataset: header is not valid JSON");
    dataset.header = DatasetHeader::from_json(parsed);

    if (!std::getline(is, line) || line.rfind("#records ", 0) != 0)
        throw DatasetError(DatasetErrorKind::Malformed, "dataset: missing #records line");
    const std::uint64_t count = std::stoull(line.substr(9));

    dataset.setting_index.reserve(count);
    dataset.sample_index.reserve(count);
    dataset.value.reserve(count);
    while (std::getline(is, line)) {
        if (line.empty())
            continue;
        std::istringstream ls(line);
        std::uint32_t si = 0, xi = 0;
        double v = 0.0;
        if (!(ls >> si >> xi >> v))
            throw DatasetError(DatasetErrorKind::Malformed, "dataset: bad record line '" + line + "'");
        dataset.setting_index.push_back(si);
        dataset.sample_index.push_back(xi);
        dataset.value.push_back(v);
    }
    if (dataset.value.size() != count) {
        std::ostringstream msg;
        msg << "dataset: truncated text records; expected " << count << " records, found "
            << dataset.value.size();
        throw DatasetError(DatasetErrorKind::Truncated, msg.str());
    }
    dataset.validate();
    return dataset;
}

}  // namespace

Dataset read_dataset(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is)
        throw std::runtime_error("read_dataset: cannot open " + path.string());
    char magic[4] = {0, 0, 0, 0};
    is.read(magic, 4);
    if (!is)
        throw DatasetError(DatasetErrorKind::Truncated, "dataset: file shorter than magic");
    is.seekg(0);
    if (std::memcmp(magic, kBinaryMagic, 4) == 0)
        return read_binary(is);
    return read_text(is);
}

Dataset dataset_from_scan(const ScanResult& scan, DatasetHeader header) {
    Dataset dataset;
    header.axis_name = scan.axis == ScanAxis::Detuning ? "delta" : "theta";
    header.axis_grid.clear();
    header.per_setting_counts.clear();
    for (const auto& point : scan.points) {
        header.axis_grid.push_back(point.setting);
        header.per_setting_counts.push_back(point.values.size());
    }
    dataset.header = std::move(header);
    for (std::size_t si = 0; si < scan.points.size(); ++si) {
        const auto& values = scan.points[si].values;
        for (std::size_t xi = 0; xi < values.size(); ++xi) {
            dataset.setting_index.push_back(static_cast<std::uint32_t>(si));
            dataset.sample_index.push_back(static_cast<std::uint32_t>(xi));
            dataset.value.push_back(values[xi]);
        }
    }
    dataset.validate();
    return dataset;
}

ScanResult dataset_to_scan(const Dataset& dataset) {
    dataset.validate();
    ScanResult scan;
    scan.axis = dataset.header.axis_name == "theta" ? ScanAxis::LoPhase : ScanAxis::Detuning;
    const std::size_t n_settings = dataset.header.per_setting_counts.size();
    scan.points.resize(n_settings);
    for (std::size_t si = 0; si < n_settings; ++si) {
        scan.points[si].setting = dataset.header.axis_grid.empty()
                                      ? 0.0
                                      : dataset.header.axis_grid[si];
        scan.points[si].values.reserve(dataset.header.per_setting_counts[si]);
    }
    for (std::size_t i = 0; i < dataset.value.size(); ++i) {
        const std::uint32_t si = dataset.setting_index[i];
        if (si >= n_settings)
            throw DatasetError(DatasetErrorKind::CountMismatch,
                               "dataset: setting index beyond header grid");
        scan.points[si].values.push_back(dataset.value[i]);
    }
    return scan;
}

Dataset dataset_from_samples(const std::vector<double>& samples, DatasetHeader header) {
    Dataset dataset;
    header.per_setting_counts = {samples.size()};
    if (header.axis_grid.empty() && header.axis_name == "none")
        header.axis_grid = {};
    dataset.header = std::move(header);
    dataset.setting_index.assign(samples.size(), 0);
    dataset.sample_index.resize(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i)
        dataset.sample_index[i] = static_cast<std::uint32_t>(i);
    dataset.value = samples;
    dataset.validate();
    return dataset;
}

}  // namespace sqn
