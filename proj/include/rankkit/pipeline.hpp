#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "rankkit/config.hpp"
#include "rankkit/transport.hpp"

namespace rankkit::pipeline {

// Stages talk to each other only through files, never shared memory, so
// every command is independently resumable and auditable. `transport` is
// injectable for tests; nullptr means the real HTTP client.
struct CommandResult {
  std::size_t records_written = 0;
  std::vector<std::string> errors;  // one entry per failed record
  bool ok() const { return errors.empty(); }
};

// Writes "<output>.errors.jsonl" when there are errors; removes a stale one
// otherwise. Returns the error-file path.
std::filesystem::path flush_errors(const std::filesystem::path& output,
                                   const CommandResult& result);

// Teacher scores + ensemble labels attached to every pair; resumable from
// the caches. Pairs failing either stage become error records.
CommandResult annotate(const PipelineConfig& config,
                       const std::filesystem::path& pairs_file,
                       const std::filesystem::path& out_file,
                       HttpTransport* transport = nullptr);

struct BalanceArtifacts {
  std::filesystem::path balanced_file;
  std::filesystem::path report_file;
  std::filesystem::path cells_before_csv;
  std::filesystem::path cells_after_csv;
};

CommandResult balance(const PipelineConfig& config,
                      const std::filesystem::path& labeled_file,
                      const BalanceArtifacts& out);

CommandResult build_samples(const PipelineConfig& config,
                            const std::filesystem::path& balanced_file,
                            const std::filesystem::path& out_file,
                            HttpTransport* transport = nullptr);

CommandResult split(const PipelineConfig& config,
                    const std::filesystem::path& samples_file,
                    const std::filesystem::path& train_file,
                    const std::filesystem::path& dev_file);

CommandResult eval_rank(const PipelineConfig& config,
                        const std::filesystem::path& qrels_file,
                        const std::filesystem::path& run_file,
                        const std::filesystem::path& report_file,
                        std::optional<bool> force_insert_override = std::nullopt);

CommandResult eval_quality(const PipelineConfig& config,
                           const std::filesystem::path& outputs_file,
                           const std::filesystem::path& report_file,
                           const std::filesystem::path& per_pair_csv,
                           bool skip_judge, HttpTransport* transport = nullptr);

CommandResult judge_kappa(const PipelineConfig& config,
                          const std::filesystem::path& labeled_file,
                          const std::filesystem::path& report_file,
                          std::size_t panel_k);

CommandResult loss_oracle(const PipelineConfig& config,
                          const std::filesystem::path& in_file,
                          const std::filesystem::path& out_file);

}  // namespace rankkit::pipeline
