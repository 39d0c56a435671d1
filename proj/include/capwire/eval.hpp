#pragma once

#include <chrono>
#include <memory>
#include <string>
#include <vector>

#include "capwire/domain.hpp"
#include "capwire/pipeline.hpp"

namespace capwire::eval {

struct EntityScores {
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

// Set match on (canonical team, jersey) pairs; confidence is ignored. With a
// roster set, team text is alias-normalized first; unknown teams fall back to
// their case/whitespace-folded raw text. Empty-set conventions: both empty is
// a perfect score, an empty side against a non-empty one scores zero.
EntityScores entity_scores(const std::vector<EntityDetection>& pred,
                           const std::vector<EntityDetection>& gt,
                           const RosterSet* rosters = nullptr);

// Lowercase, punctuation-to-space, whitespace tokenization.
std::vector<std::string> tokenize(std::string_view text);

// Multiset-overlap token F1 in [0, 1]. Both empty -> 1, exactly one empty -> 0.
double token_f1(std::string_view candidate, std::string_view reference);

// Pluggable caption-similarity contract. The in-tree default is token_f1;
// a remote embedding backend provides BERTScore-style greedy cosine matching.
class SimilarityScorer {
public:
    virtual ~SimilarityScorer() = default;
    virtual std::string name() const = 0;
    virtual double score(std::string_view candidate, std::string_view reference) = 0;
};

class TokenF1Scorer : public SimilarityScorer {
public:
    std::string name() const override { return "token_f1"; }
    double score(std::string_view candidate, std::string_view reference) override {
        return token_f1(candidate, reference);
    }
};

// Greedy max-cosine token matching over embeddings served by a remote
// endpoint (POST <base>/embed {"tokens": [...]} -> {"vectors": [[...], ...]}).
// Throws BackendError when the endpoint is unavailable; evaluate_corpus then
// falls back to token_f1 with a notice.
class RemoteEmbeddingScorer : public SimilarityScorer {
public:
    explicit RemoteEmbeddingScorer(
        std::string base_url,
        std::chrono::milliseconds timeout = std::chrono::milliseconds{5000});

    std::string name() const override { return "embedding:" + base_url_; }
    double score(std::string_view candidate, std::string_view reference) override;

private:
    std::vector<std::vector<double>> embed(const std::vector<std::string>& tokens);

    std::string base_url_;
    std::chrono::milliseconds timeout_;
};

struct GroundTruth {
    std::string source_id;
    std::vector<EntityDetection> detections;
    std::string caption;
};

struct PerImageScore {
    std::string source_id;
    double caption_score = 0.0;
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;
    bool pipeline_ok = false;
};

struct EvalReport {
    std::size_t n_images = 0;
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;
    double entity_precision = 0.0;
    double entity_recall = 0.0;
    double entity_f1 = 0.0;
    double caption_score_mean = 0.0;
    double caption_score_std = 0.0;  // sample standard deviation
    std::vector<PerImageScore> per_image;
    std::vector<std::string> notices;
};

// Micro-averaged entity metrics (pooled TP/FP/FN) plus caption-similarity
// mean and sample std over per-image scores. Results and ground truth must be
// aligned by source_id; images whose pipeline errored score caption 0 and
// contribute a false negative for every ground-truth entity. Throws Error on
// alignment mismatch or an empty corpus.
EvalReport evaluate_corpus(const std::vector<pipeline::PipelineResult>& results,
                           const std::vector<GroundTruth>& gt,
                           const RosterSet* rosters = nullptr,
                           SimilarityScorer* scorer = nullptr);

std::string render_table(const EvalReport& report);

}  // namespace capwire::eval
