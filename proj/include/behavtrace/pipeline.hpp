#pragma once

#include "behavtrace/error.hpp"
#include "behavtrace/run_config.hpp"
#include "behavtrace/trace_model.hpp"

#include <string>
#include <vector>

namespace behavtrace {

enum class Stage { Sessionize, Budget, Transitions, Patterns, Rrs, Rhythm };

std::string_view to_string(Stage stage);

/// Every stage in pipeline order.
const std::vector<Stage>& all_stages();

struct LoadedCorpus {
    TraceCorpus corpus;
    ParseReport report;
};

/// Parses every configured input (format from config or file extension) and
/// merges them into one normalized corpus.
LoadedCorpus load_inputs(const RunConfig& config);

/// Raised when a stage fails; the stage's partial outputs and, for a full
/// pipeline run, a manifest naming the failed stage stay on disk.
class StageError : public Error {
public:
    StageError(Stage stage, std::string message, bool data_error)
        : Error(std::move(message)), stage_(stage), data_error_(data_error) {}

    Stage stage() const { return stage_; }
    bool data_error() const { return data_error_; }

private:
    Stage stage_;
    bool data_error_;
};

struct RunSummary {
    std::vector<std::string> written;  // file names relative to the output dir
    std::size_t users = 0;
    std::size_t sessions = 0;
};

/// Runs sessionization plus the requested stages over the corpus and writes
/// their report files into config.out_dir. Output bytes depend only on the
/// corpus and the config, never on the thread count.
RunSummary run_stages(const TraceCorpus& corpus, const RunConfig& config, const std::vector<Stage>& stages);

/// Full pipeline: all stages plus manifest.json recording every parameter,
/// the inputs, the outputs, and the run status.
RunSummary run_pipeline(const LoadedCorpus& loaded, const RunConfig& config);

}  // namespace behavtrace
