#include "capwire/eval.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include <httplib.h>
#include <json.hpp>

namespace capwire::eval {

namespace {

std::set<std::pair<std::string, int>> detection_set(const std::vector<EntityDetection>& detections,
                                                    const RosterSet* rosters) {
    std::set<std::pair<std::string, int>> out;
    for (const EntityDetection& d : detections) {
        std::string team = fold(d.team_ref);
        if (rosters != nullptr) {
            if (auto canonical = rosters->normalize_team_name(d.team_ref)) {
                team = *canonical;
            }
        }
        out.emplace(std::move(team), d.jersey_number);
    }
    return out;
}

double safe_ratio(std::size_t numerator, std::size_t denominator, bool other_side_empty) {
    if (denominator == 0) return other_side_empty ? 1.0 : 0.0;
    return static_cast<double>(numerator) / static_cast<double>(denominator);
}

double harmonic(double p, double r) {
    return (p + r) > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
}

}  // namespace

EntityScores entity_scores(const std::vector<EntityDetection>& pred,
                           const std::vector<EntityDetection>& gt, const RosterSet* rosters) {
    const auto pred_set = detection_set(pred, rosters);
    const auto gt_set = detection_set(gt, rosters);

    EntityScores scores;
    for (const auto& item : pred_set) {
        if (gt_set.count(item) > 0) {
            ++scores.tp;
        } else {
            ++scores.fp;
        }
    }
    scores.fn = gt_set.size() - scores.tp;

    scores.precision = safe_ratio(scores.tp, pred_set.size(), gt_set.empty());
    scores.recall = safe_ratio(scores.tp, gt_set.size(), pred_set.empty());
    scores.f1 = harmonic(scores.precision, scores.recall);
    return scores;
}

std::vector<std::string> tokenize(std::string_view text) {
    std::string scratch;
    scratch.reserve(text.size());
    for (char c : text) {
        const auto uc = static_cast<unsigned char>(c);
        if (std::ispunct(uc)) {
            scratch += ' ';
        } else {
            scratch += static_cast<char>(std::tolower(uc));
        }
    }
    std::vector<std::string> tokens;
    std::istringstream in(scratch);
    std::string token;
    while (in >> token) tokens.push_back(token);
    return tokens;
}

double token_f1(std::string_view candidate, std::string_view reference) {
    const auto cand = tokenize(candidate);
    const auto ref = tokenize(reference);
    if (cand.empty() && ref.empty()) return 1.0;
    if (cand.empty() || ref.empty()) return 0.0;

    std::map<std::string, std::size_t> ref_counts;
    for (const std::string& token : ref) ++ref_counts[token];

    std::size_t overlap = 0;
    for (const std::string& token : cand) {
        auto it = ref_counts.find(token);
        if (it != ref_counts.end() && it->second > 0) {
            --it->second;
            ++overlap;
        }
    }

    const double p = static_cast<double>(overlap) / static_cast<double>(cand.size());
    const double r = static_cast<double>(overlap) / static_cast<double>(ref.size());
    return harmonic(p, r);
}

RemoteEmbeddingScorer::RemoteEmbeddingScorer(std::string base_url,
                                             std::chrono::milliseconds timeout)
    : base_url_(std::move(base_url)), timeout_(timeout) {}

std::vector<std::vector<double>> RemoteEmbeddingScorer::embed(
    const std::vector<std::string>& tokens) {
    httplib::Client client(base_url_);
    client.set_connection_timeout(std::chrono::duration_cast<std::chrono::seconds>(timeout_));
    client.set_read_timeout(timeout_);
    client.set_write_timeout(timeout_);

    nlohmann::json payload{{"tokens", tokens}};
    auto res = client.Post("/embed", payload.dump(), "application/json");
    if (!res) {
        throw BackendError("embedding backend " + base_url_ + " unreachable: " +
                               httplib::to_string(res.error()),
                           /*retriable=*/true);
    }
    if (res->status != 200) {
        throw BackendError("embedding backend " + base_url_ + " returned status " +
                               std::to_string(res->status),
                           res->status >= 500);
    }
    try {
        const auto doc = nlohmann::json::parse(res->body);
        auto vectors = doc.at("vectors").get<std::vector<std::vector<double>>>();
        if (vectors.size() != tokens.size()) {
            throw BackendError("embedding backend returned " + std::to_string(vectors.size()) +
                                   " vectors for " + std::to_string(tokens.size()) + " tokens",
                               /*retriable=*/false);
        }
        return vectors;
    } catch (const nlohmann::json::exception& e) {
        throw BackendError("embedding backend returned malformed JSON: " + std::string(e.what()),
                           /*retriable=*/false);
    }
}

double RemoteEmbeddingScorer::score(std::string_view candidate, std::string_view reference) {
    const auto cand_tokens = tokenize(candidate);
    const auto ref_tokens = tokenize(reference);
    if (cand_tokens.empty() && ref_tokens.empty()) return 1.0;
    if (cand_tokens.empty() || ref_tokens.empty()) return 0.0;

    const auto cand_vecs = embed(cand_tokens);
    const auto ref_vecs = embed(ref_tokens);

    auto cosine = [](const std::vector<double>& a, const std::vector<double>& b) {
        double dot = 0.0, na = 0.0, nb = 0.0;
        const std::size_t n = std::min(a.size(), b.size());
        for (std::size_t i = 0; i < n; ++i) {
            dot += a[i] * b[i];
            na += a[i] * a[i];
            nb += b[i] * b[i];
        }
        if (na == 0.0 || nb == 0.0) return 0.0;
        return dot / (std::sqrt(na) * std::sqrt(nb));
    };

    // Greedy max matching in both directions.
    double precision = 0.0;
    for (const auto& cv : cand_vecs) {
        double best = 0.0;
        for (const auto& rv : ref_vecs) best = std::max(best, cosine(cv, rv));
        precision += best;
    }
    precision /= static_cast<double>(cand_vecs.size());

    double recall = 0.0;
    for (const auto& rv : ref_vecs) {
        double best = 0.0;
        for (const auto& cv : cand_vecs) best = std::max(best, cosine(rv, cv));
        recall += best;
    }
    recall /= static_cast<double>(ref_vecs.size());

    return harmonic(precision, recall);
}

EvalReport evaluate_corpus(const std::vector<pipeline::PipelineResult>& results,
                           const std::vector<GroundTruth>& gt, const RosterSet* rosters,
                           SimilarityScorer* scorer) {
    if (results.empty()) {
        throw Error("evaluate_corpus requires at least one image");
    }
    if (results.size() != gt.size()) {
        throw Error("results and ground truth differ in size: " + std::to_string(results.size()) +
                    " vs " + std::to_string(gt.size()));
    }

    EvalReport report;
    report.n_images = results.size();

    TokenF1Scorer fallback;
    bool fallback_noted = false;

    std::vector<double> caption_scores;
    caption_scores.reserve(results.size());

    for (std::size_t i = 0; i < results.size(); ++i) {
        const pipeline::PipelineResult& result = results[i];
        const GroundTruth& truth = gt[i];
        if (result.source_id != truth.source_id) {
            throw Error("alignment error at index " + std::to_string(i) + ": result '" +
                        result.source_id + "' vs ground truth '" + truth.source_id + "'");
        }

        PerImageScore image;
        image.source_id = result.source_id;
        image.pipeline_ok = result.ok();

        if (!result.ok()) {
            // Errored pipeline: zero caption score, every ground-truth entity
            // becomes a false negative.
            image.fn = detection_set(truth.detections, rosters).size();
            image.caption_score = 0.0;
        } else {
            const EntityScores scores = entity_scores(result.detections, truth.detections, rosters);
            image.tp = scores.tp;
            image.fp = scores.fp;
            image.fn = scores.fn;

            SimilarityScorer* active = scorer != nullptr ? scorer : &fallback;
            try {
                image.caption_score = active->score(result.caption_text, truth.caption);
            } catch (const BackendError& e) {
                if (!fallback_noted) {
                    report.notices.push_back("similarity backend unavailable, fell back to " +
                                             fallback.name() + ": " + e.what());
                    fallback_noted = true;
                }
                image.caption_score = fallback.score(result.caption_text, truth.caption);
            }
        }

        report.tp += image.tp;
        report.fp += image.fp;
        report.fn += image.fn;
        caption_scores.push_back(image.caption_score);
        report.per_image.push_back(std::move(image));
    }

    const std::size_t pred_total = report.tp + report.fp;
    const std::size_t gt_total = report.tp + report.fn;
    report.entity_precision = safe_ratio(report.tp, pred_total, gt_total == 0);
    report.entity_recall = safe_ratio(report.tp, gt_total, pred_total == 0);
    report.entity_f1 = harmonic(report.entity_precision, report.entity_recall);

    double sum = 0.0;
    for (double score : caption_scores) sum += score;
    report.caption_score_mean = sum / static_cast<double>(caption_scores.size());
    if (caption_scores.size() > 1) {
        double ss = 0.0;
        for (double score : caption_scores) {
            const double d = score - report.caption_score_mean;
            ss += d * d;
        }
        report.caption_score_std = std::sqrt(ss / static_cast<double>(caption_scores.size() - 1));
    }

    return report;
}

std::string render_table(const EvalReport& report) {
    std::ostringstream out;
    char line[160];
    out << "+----------------------+------------+\n";
    out << "| metric               | value      |\n";
    out << "+----------------------+------------+\n";
    auto row = [&](const char* name, double value) {
        std::snprintf(line, sizeof(line), "| %-20s | %10.4f |\n", name, value);
        out << line;
    };
    std::snprintf(line, sizeof(line), "| %-20s | %10zu |\n", "images", report.n_images);
    out << line;
    row("entity_precision", report.entity_precision);
    row("entity_recall", report.entity_recall);
    row("entity_f1", report.entity_f1);
    row("caption_score_mean", report.caption_score_mean);
    row("caption_score_std", report.caption_score_std);
    out << "+----------------------+------------+\n";
    for (const std::string& notice : report.notices) {
        out << "note: " << notice << "\n";
    }
    return out.str();
}

}  // namespace capwire::eval
