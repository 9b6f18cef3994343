#include "ssc/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <iostream>
#include <mutex>
#include <random>
#include <thread>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "ssc/errors.hpp"

namespace ssc {

namespace {

constexpr double kRadToDeg = 180.0 / 3.14159265358979323846;

double planar_distance(const PoseSE3& t1, const PoseSE3& t2) {
    const Eigen::Vector3d rel = t1.rotation.transpose() * (t2.translation - t1.translation);
    return std::hypot(rel.x(), rel.y());
}

std::uint64_t pack_pair(int i, int j) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(i)) << 32) |
           static_cast<std::uint32_t>(j);
}

}  // namespace

RelativePose gt_relative_pose(const PoseSE3& t1, const PoseSE3& t2) {
    const PoseSE3 rel = t1.inverse() * t2;
    RelativePose pose;
    pose.dx = rel.translation.x();
    pose.dy = rel.translation.y();
    pose.theta_deg = wrap_degrees(std::atan2(rel.rotation(1, 0), rel.rotation(0, 0)) * kRadToDeg);
    return pose;
}

std::vector<LabeledPair> sample_pairs(const std::vector<PoseSE3>& poses, double alpha,
                                      std::uint64_t seed, int min_gap) {
    if (!(alpha > 0.0)) throw Error("sample_pairs: alpha must be > 0");
    const int n = static_cast<int>(poses.size());
    if (n < 2) throw Error("sample_pairs: need at least 2 poses");

    std::vector<LabeledPair> out;
    for (int i = 0; i < n; ++i) {
        for (int j = i + std::max(1, min_gap); j < n; ++j) {
            if (planar_distance(poses[i], poses[j]) < kPositiveDistance) {
                LabeledPair p;
                p.i = i;
                p.j = j;
                p.is_positive = true;
                p.gt_pose = gt_relative_pose(poses[i], poses[j]);
                out.push_back(p);
            }
        }
    }
    const std::size_t n_positive = out.size();
    if (n_positive == 0)
        throw EmptyPositivesError("sample_pairs: no positive pair (distance < 3 m) found");

    std::size_t available = 0;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (planar_distance(poses[i], poses[j]) > kNegativeDistance) ++available;

    const std::size_t requested = static_cast<std::size_t>(alpha * n_positive);
    std::mt19937_64 rng(seed);
    std::vector<std::uint64_t> chosen;

    if (requested >= available) {
        if (requested > available)
            std::cerr << "sample_pairs: only " << available << " negatives available, "
                      << requested << " requested; taking all\n";
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j)
                if (planar_distance(poses[i], poses[j]) > kNegativeDistance)
                    chosen.push_back(pack_pair(i, j));
    } else if (requested * 3 >= available) {
        std::vector<std::uint64_t> candidates;
        candidates.reserve(available);
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j)
                if (planar_distance(poses[i], poses[j]) > kNegativeDistance)
                    candidates.push_back(pack_pair(i, j));
        for (std::size_t k = 0; k < requested; ++k) {  // partial Fisher-Yates
            const std::size_t pick = k + rng() % (candidates.size() - k);
            std::swap(candidates[k], candidates[pick]);
        }
        chosen.assign(candidates.begin(), candidates.begin() + static_cast<long>(requested));
    } else {
        std::unordered_set<std::uint64_t> seen;
        while (seen.size() < requested) {
            const int i = static_cast<int>(rng() % static_cast<std::uint64_t>(n));
            const int j = static_cast<int>(rng() % static_cast<std::uint64_t>(n));
            if (i == j) continue;
            const int lo = std::min(i, j), hi = std::max(i, j);
            if (planar_distance(poses[lo], poses[hi]) <= kNegativeDistance) continue;
            seen.insert(pack_pair(lo, hi));
        }
        chosen.assign(seen.begin(), seen.end());
    }
    std::sort(chosen.begin(), chosen.end());

    out.reserve(out.size() + chosen.size());
    for (std::uint64_t packed : chosen) {
        LabeledPair p;
        p.i = static_cast<int>(packed >> 32);
        p.j = static_cast<int>(packed & 0xffffffffu);
        p.is_positive = false;
        p.gt_pose = gt_relative_pose(poses[p.i], poses[p.j]);
        out.push_back(p);
    }
    return out;
}

std::vector<PrPoint> pr_curve(const std::vector<double>& scores,
                              const std::vector<bool>& labels) {
    if (scores.size() != labels.size())
        throw Error("pr_curve: scores and labels differ in length");
    const long total_pos = std::count(labels.begin(), labels.end(), true);
    const long total_neg = static_cast<long>(labels.size()) - total_pos;
    if (total_pos == 0 || total_neg == 0)
        throw Error("pr_curve: need at least one positive and one negative");

    std::vector<std::size_t> order(scores.size());
    for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

    std::vector<PrPoint> curve;
    long tp = 0, fp = 0;
    std::size_t k = 0;
    while (k < order.size()) {
        const double threshold = scores[order[k]];
        while (k < order.size() && scores[order[k]] == threshold) {
            if (labels[order[k]])
                ++tp;
            else
                ++fp;
            ++k;
        }
        PrPoint p;
        p.threshold = threshold;
        p.tp = tp;
        p.fp = fp;
        p.fn = total_pos - tp;
        p.precision = static_cast<double>(tp) / (tp + fp);
        p.recall = static_cast<double>(tp) / total_pos;
        curve.push_back(p);
    }
    return curve;
}

double f1_max(const std::vector<PrPoint>& curve) {
    if (curve.empty()) throw Error("f1_max: empty curve");
    double best = 0.0;
    for (const auto& p : curve) {
        if (p.precision + p.recall <= 0.0) continue;
        best = std::max(best, 2.0 * p.precision * p.recall / (p.precision + p.recall));
    }
    return best;
}

double f1_max_threshold(const std::vector<PrPoint>& curve) {
    if (curve.empty()) throw Error("f1_max_threshold: empty curve");
    double best = -1.0;
    double threshold = curve.front().threshold;
    for (const auto& p : curve) {
        if (p.precision + p.recall <= 0.0) continue;
        const double f1 = 2.0 * p.precision * p.recall / (p.precision + p.recall);
        if (f1 > best) {
            best = f1;
            threshold = p.threshold;
        }
    }
    return threshold;
}

double extended_precision(const std::vector<PrPoint>& curve) {
    if (curve.empty()) throw Error("extended_precision: empty curve");
    const double p_r0 = curve.front().precision;  // descending thresholds: first = min recall
    double r_p100 = 0.0;
    for (const auto& p : curve)
        if (p.fp == 0 && p.tp > 0) r_p100 = std::max(r_p100, p.recall);
    return 0.5 * (p_r0 + r_p100);
}

PoseErrorStats pose_error_stats(const std::vector<PosePair>& pairs) {
    if (pairs.empty()) throw Error("pose_error_stats: empty input");
    PoseErrorStats stats;
    for (const auto& p : pairs) {
        stats.mean_yaw_error_deg +=
            std::abs(wrap_degrees(p.estimate.theta_deg - p.ground_truth.theta_deg));
        stats.mean_translation_error_m +=
            std::hypot(p.estimate.dx - p.ground_truth.dx, p.estimate.dy - p.ground_truth.dy);
    }
    stats.count = pairs.size();
    stats.mean_yaw_error_deg /= static_cast<double>(stats.count);
    stats.mean_translation_error_m /= static_cast<double>(stats.count);
    return stats;
}

EvalReport build_report(const std::vector<PairOutcome>& outcomes, double pose_threshold) {
    EvalReport report;
    std::vector<double> scores;
    std::vector<bool> labels;
    scores.reserve(outcomes.size());
    labels.reserve(outcomes.size());
    for (const auto& o : outcomes) {
        scores.push_back(o.result.score);
        labels.push_back(o.pair.is_positive);
        if (o.pair.is_positive)
            ++report.n_positive;
        else
            ++report.n_negative;
        report.mean_timings_us.yaw_us += o.result.timings.yaw_us;
        report.mean_timings_us.icp_us += o.result.timings.icp_us;
        report.mean_timings_us.describe_us += o.result.timings.describe_us;
        report.mean_timings_us.retrieve_us += o.result.timings.retrieve_us;
    }
    if (!outcomes.empty()) {
        const double inv = 1.0 / static_cast<double>(outcomes.size());
        report.mean_timings_us.yaw_us *= inv;
        report.mean_timings_us.icp_us *= inv;
        report.mean_timings_us.describe_us *= inv;
        report.mean_timings_us.retrieve_us *= inv;
    }

    report.curve = pr_curve(scores, labels);
    report.f1_max = f1_max(report.curve);
    report.f1_threshold = f1_max_threshold(report.curve);
    report.extended_precision = extended_precision(report.curve);
    report.pose_threshold =
        std::isnan(pose_threshold) ? report.f1_threshold : pose_threshold;

    std::vector<PosePair> true_positives;
    for (const auto& o : outcomes)
        if (o.pair.is_positive && o.result.score >= report.pose_threshold)
            true_positives.push_back({o.result.pose, o.pair.gt_pose});
    if (!true_positives.empty()) report.pose_errors = pose_error_stats(true_positives);
    return report;
}

EvalRun run_evaluation(const FrameProvider& frames, const std::vector<PoseSE3>& poses,
                       const EvalConfig& config) {
    EvalRun run;
    const std::vector<LabeledPair> pairs =
        sample_pairs(poses, config.alpha, config.seed, config.min_gap);
    run.outcomes.resize(pairs.size());

    unsigned workers = config.workers > 0 ? static_cast<unsigned>(config.workers)
                                          : std::max(1u, std::thread::hardware_concurrency());
    workers = std::min<unsigned>(workers, static_cast<unsigned>(pairs.size()));

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto work = [&]() {
        try {
            for (std::size_t idx = next.fetch_add(1); idx < pairs.size();
                 idx = next.fetch_add(1)) {
                const LabeledPair& pair = pairs[idx];
                const auto cloud_i = frames(pair.i);
                const auto cloud_j = frames(pair.j);
                run.outcomes[idx] = {pair,
                                     match_pair(*cloud_i, *cloud_j, config.match, config.ablation)};
            }
        } catch (...) {
            std::lock_guard<std::mutex> lock(failure_mutex);
            if (!failure) failure = std::current_exception();
        }
    };

    if (workers <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }
    if (failure) std::rethrow_exception(failure);

    run.report = build_report(run.outcomes);
    return run;
}

void write_report(const std::filesystem::path& dir, const EvalRun& run) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);

    {
        std::ofstream out(dir / "pr_curve.csv");
        out << "threshold,precision,recall,tp,fp,fn\n";
        for (const auto& p : run.report.curve)
            out << p.threshold << ',' << p.precision << ',' << p.recall << ',' << p.tp << ','
                << p.fp << ',' << p.fn << '\n';
    }
    {
        std::ofstream out(dir / "pose_errors.csv");
        out << "frame_i,frame_j,score,yaw_error_deg,translation_error_m\n";
        for (const auto& o : run.outcomes) {
            if (!o.pair.is_positive || o.result.score < run.report.pose_threshold) continue;
            out << o.pair.i << ',' << o.pair.j << ',' << o.result.score << ','
                << std::abs(wrap_degrees(o.result.pose.theta_deg - o.pair.gt_pose.theta_deg))
                << ','
                << std::hypot(o.result.pose.dx - o.pair.gt_pose.dx,
                              o.result.pose.dy - o.pair.gt_pose.dy)
                << '\n';
        }
    }
    {
        std::ofstream out(dir / "timings.csv");
        out << "stage,mean_us\n";
        out << "yaw," << run.report.mean_timings_us.yaw_us << '\n';
        out << "icp," << run.report.mean_timings_us.icp_us << '\n';
        out << "describe," << run.report.mean_timings_us.describe_us << '\n';
        out << "retrieve," << run.report.mean_timings_us.retrieve_us << '\n';
    }
    {
        std::ofstream out(dir / "matches.jsonl");
        for (const auto& o : run.outcomes)
            out << match_result_json(o.result, o.pair.i, o.pair.j) << '\n';
    }
    {
        nlohmann::json j;
        j["n_positive"] = run.report.n_positive;
        j["n_negative"] = run.report.n_negative;
        j["f1_max"] = run.report.f1_max;
        j["f1_threshold"] = run.report.f1_threshold;
        j["extended_precision"] = run.report.extended_precision;
        j["pose_threshold"] = run.report.pose_threshold;
        j["pose_errors"] = {{"mean_yaw_error_deg", run.report.pose_errors.mean_yaw_error_deg},
                            {"mean_translation_error_m",
                             run.report.pose_errors.mean_translation_error_m},
                            {"count", run.report.pose_errors.count}};
        j["mean_timings_us"] = {{"yaw", run.report.mean_timings_us.yaw_us},
                                {"icp", run.report.mean_timings_us.icp_us},
                                {"describe", run.report.mean_timings_us.describe_us},
                                {"retrieve", run.report.mean_timings_us.retrieve_us}};
        std::ofstream out(dir / "report.json");
        out << j.dump(2) << '\n';
    }
}

}  // namespace ssc
