// Dataset format: columnar records (setting index, sample index, value)
// under a structured-text header.  Binary layout is bit-exact on round
// trip; a plain-text interchange export carries one record per line.
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sqn/simulator.hpp"

namespace sqn {

enum class DatasetErrorKind {
    Malformed,
    VersionMismatch,
    Truncated,
    CountMismatch,
};

class DatasetError : public std::runtime_error {
public:
    DatasetError(DatasetErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}
    DatasetErrorKind kind() const { return kind_; }

private:
    DatasetErrorKind kind_;
};

struct DatasetHeader {
    int format_version = 1;
    std::string beam;
    std::string technique = "none";  // "hd" | "rd" | "explicit" | "none"
    std::string axis_name = "none";  // "theta" | "delta" | "none"
    std::vector<double> axis_grid;
    std::vector<std::uint64_t> per_setting_counts;
    std::uint64_t seed = 0;
    double sql_normalization = 1.0;  // SQL applied at write time
    nlohmann::json state;            // state descriptor, may be null
    nlohmann::json demod;            // demod config when the DSP chain ran
    std::vector<double> filter_taps;
    std::string config_digest;       // digest of the producing run config

    nlohmann::json to_json() const;
    static DatasetHeader from_json(const nlohmann::json& j);
};

struct Dataset {
    DatasetHeader header;
    std::vector<std::uint32_t> setting_index;
    std::vector<std::uint32_t> sample_index;
    std::vector<double> value;  // SQL-normalized units

    // Header/record consistency; throws DatasetError(CountMismatch).
    void validate() const;
};

enum class DatasetFormat { Binary, Text };

void write_dataset(const Dataset& dataset, const std::filesystem::path& path,
                   DatasetFormat format = DatasetFormat::Binary);

// Detects binary vs text from the leading magic.
Dataset read_dataset(const std::filesystem::path& path);

// Scan <-> dataset conversion (the dataset is the on-disk form of a scan).
Dataset dataset_from_scan(const ScanResult& scan, DatasetHeader header);
ScanResult dataset_to_scan(const Dataset& dataset);

// Single-setting dataset from a plain sample stream.
Dataset dataset_from_samples(const std::vector<double>& samples, DatasetHeader header);

inline constexpr int kDatasetFormatVersion = 1;

}  // namespace sqn
