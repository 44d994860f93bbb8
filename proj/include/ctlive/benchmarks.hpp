#pragma once

// Scaled-down benchmark circuits compiled into the library.

#include <optional>
#include <string>
#include <vector>

namespace ctlive {

struct BundledFile {
    std::string name;
    std::string content;
};

/// Every file of the benchmarks directory, sorted by name.
const std::vector<BundledFile>& bundled_files();

struct Benchmark {
    std::string name;
    std::string description;
    std::string verilog;
    /// Sidecar assumptions, when the benchmark has a variant with them.
    std::optional<std::string> annot;
    std::optional<std::string> hints;
    /// Expected check verdict for the plain file and with the sidecar
    /// (assumptions or hints).
    std::string expected;
    std::string expected_with_annot;
};

std::vector<Benchmark> bundle_benchmarks();
const Benchmark& find_benchmark(const std::string& name);

}  // namespace ctlive
