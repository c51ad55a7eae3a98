#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "obskit/empirical_gramian.hpp"

namespace obskit::app {

using nlohmann::json;

/// Shortest text that round-trips a double ("%.17g"); "inf"/"-inf"/"nan"
/// for non-finite values.
std::string format_double(double v);

/// Finite numbers pass through; infinities and NaN become null.
json number_or_null(double v);

json gramian_to_json(const GramianResult& g);

/// CSV with a leading "# obskit <command> v1" schema line.
class CsvWriter {
  public:
    CsvWriter(std::string command, std::vector<std::string> columns);
    void add_row(const std::vector<double>& values);
    void add_row(const std::vector<std::string>& cells);
    std::string str() const;

  private:
    std::string text_;
    std::size_t columns_;
};

void write_text_file(const std::filesystem::path& path, const std::string& text);

/// Worker count: OBSKIT_THREADS if set and positive, else hardware concurrency.
int worker_count();

/// Runs fn(i) for i in [0, count) on the worker pool. Each index is handled
/// exactly once; the first exception is rethrown after all workers join.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn);

}  // namespace obskit::app
