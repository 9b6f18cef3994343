// Command-line surface: describe / match / eval / synth / bench.

#include <CLI11.hpp>
#include <chrono>
#include <deque>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <mutex>
#include <nlohmann/json.hpp>
#include <sstream>
#include <unordered_map>

#include "ssc/descriptor.hpp"
#include "ssc/errors.hpp"
#include "ssc/evaluation.hpp"
#include "ssc/global_sicp.hpp"
#include "ssc/kitti_io.hpp"
#include "ssc/pipeline.hpp"
#include "ssc/synthetic.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct ParamFlags {
    ssc::SicpParams sicp;
    ssc::SscParams ssc_params;
    std::string priority_file;

    void attach(CLI::App* cmd) {
        cmd->add_option("--na", sicp.na, "Ring sectors for pose estimation");
        cmd->add_option("--nl", sicp.nl, "ICP correspondence window length (slots)");
        cmd->add_option("--max-iters", sicp.max_iters, "ICP iteration cap");
        cmd->add_option("--converge-eps", sicp.converge_eps, "ICP convergence threshold (m)");
        cmd->add_option("--refine-passes", sicp.refine_passes, "Extra two-step passes");
        cmd->add_option("--ns", ssc_params.ns, "Descriptor sectors");
        cmd->add_option("--nr", ssc_params.nr, "Descriptor rings");
        cmd->add_option("--rmax", ssc_params.rmax, "Descriptor range cutoff (m)");
        cmd->add_option("--priority-file", priority_file,
                        "Class priority config (class-name rank per line)");
    }

    ssc::MatchParams match_params() const {
        ssc::MatchParams p;
        p.sicp = sicp;
        p.ssc = ssc_params;
        if (!priority_file.empty()) p.priority = ssc::load_priority(priority_file);
        return p;
    }
};

struct AblationFlags {
    bool no_yaw = false;
    bool no_icp = false;
    bool no_semantic = false;

    void attach(CLI::App* cmd) {
        cmd->add_flag("--no-yaw", no_yaw, "Column-shift matching instead of yaw pre-alignment");
        cmd->add_flag("--no-icp", no_icp, "Skip translation correction");
        cmd->add_flag("--no-semantic", no_semantic, "Max-height encoding instead of classes");
    }

    ssc::AblationConfig config() const {
        ssc::AblationConfig c;
        c.use_yaw_align = !no_yaw;
        c.use_icp = !no_icp;
        c.use_semantic_encoding = !no_semantic;
        return c;
    }
};

ssc::LabeledCloud load_pair(const fs::path& scan, const fs::path& labels) {
    return ssc::load_labels(labels, ssc::load_scan(scan));
}

/// Thread-safe frame loader with a bounded cache, for pair-heavy evaluation.
class CloudCache {
public:
    CloudCache(ssc::SequenceIndex index, std::size_t capacity)
        : index_(std::move(index)), capacity_(std::max<std::size_t>(capacity, 2)) {}

    std::shared_ptr<const ssc::LabeledCloud> operator()(int frame) {
        std::lock_guard<std::mutex> lock(mutex_);
        auto it = cache_.find(frame);
        if (it != cache_.end()) return it->second;
        auto cloud = std::make_shared<ssc::LabeledCloud>(
            load_pair(index_.scans[static_cast<std::size_t>(frame)],
                      index_.labels[static_cast<std::size_t>(frame)]));
        cloud->frame_id = static_cast<std::uint32_t>(frame);
        if (order_.size() >= capacity_) {
            cache_.erase(order_.front());
            order_.pop_front();
        }
        order_.push_back(frame);
        cache_.emplace(frame, cloud);
        return cache_.at(frame);
    }

private:
    ssc::SequenceIndex index_;
    std::size_t capacity_;
    std::mutex mutex_;
    std::unordered_map<int, std::shared_ptr<const ssc::LabeledCloud>> cache_;
    std::deque<int> order_;
};

int cmd_describe(const fs::path& scan, const fs::path& labels, const fs::path& out,
                 const fs::path& csv, const ParamFlags& params) {
    const ssc::MatchParams mp = params.match_params();
    const ssc::LabeledCloud cloud = load_pair(scan, labels);
    if (cloud.empty()) std::cerr << "warning: empty scan " << scan << "\n";
    const ssc::SscDescriptor desc = ssc::encode(cloud, mp.ssc, mp.priority);
    ssc::save_descriptor(out, desc);
    if (!csv.empty()) ssc::export_descriptor_csv(csv, desc);

    std::unordered_map<std::string, long> cells;
    for (std::uint8_t code : desc.grid()) {
        if (code == 0) continue;
        ++cells[std::string(ssc::class_name(static_cast<ssc::SemanticClass>(code)))];
    }
    json j;
    j["descriptor"] = out.string();
    j["rings"] = desc.rings();
    j["sectors"] = desc.sectors();
    j["occupancy"] =
        static_cast<double>(desc.nonzero_count()) / (desc.rings() * desc.sectors());
    j["cells_per_class"] = cells;
    std::cout << j.dump() << "\n";
    return 0;
}

int cmd_match(const fs::path& scan_a, const fs::path& labels_a, const fs::path& scan_b,
              const fs::path& labels_b, const ParamFlags& params, const AblationFlags& ablation) {
    const ssc::LabeledCloud a = load_pair(scan_a, labels_a);
    const ssc::LabeledCloud b = load_pair(scan_b, labels_b);
    const ssc::MatchResult res = ssc::match_pair(a, b, params.match_params(), ablation.config());
    std::cout << ssc::match_result_json(res, static_cast<int>(a.frame_id),
                                        static_cast<int>(b.frame_id))
              << "\n";
    if (!res.ok()) std::cerr << "note: " << res.diagnostic << "\n";
    return 0;
}

int cmd_eval(const fs::path& root, const std::string& sequence, const fs::path& out,
             double alpha, std::uint64_t seed, int min_gap, int workers, std::size_t cache,
             const ParamFlags& params, const AblationFlags& ablation) {
    ssc::SequenceIndex index = ssc::index_sequence(root, sequence);
    std::cerr << "sequence " << sequence << ": " << index.size() << " frames\n";
    const std::vector<ssc::PoseSE3> poses = index.poses;

    ssc::EvalConfig config;
    config.alpha = alpha;
    config.seed = seed;
    config.min_gap = min_gap;
    config.workers = workers;
    config.match = params.match_params();
    config.ablation = ablation.config();

    auto loader = std::make_shared<CloudCache>(std::move(index), cache);
    const ssc::EvalRun run =
        ssc::run_evaluation([loader](int frame) { return (*loader)(frame); }, poses, config);
    ssc::write_report(out, run);

    json j;
    j["f1_max"] = run.report.f1_max;
    j["extended_precision"] = run.report.extended_precision;
    j["mean_yaw_error_deg"] = run.report.pose_errors.mean_yaw_error_deg;
    j["mean_translation_error_m"] = run.report.pose_errors.mean_translation_error_m;
    j["n_positive"] = run.report.n_positive;
    j["n_negative"] = run.report.n_negative;
    j["report_dir"] = out.string();
    std::cout << j.dump() << "\n";
    return 0;
}

void export_frame(const fs::path& seq_dir, int frame, const ssc::LabeledCloud& cloud) {
    std::ostringstream name;
    name << std::setw(6) << std::setfill('0') << frame;
    ssc::write_scan(seq_dir / "velodyne" / (name.str() + ".bin"), cloud);
    ssc::write_labels(seq_dir / "labels" / (name.str() + ".label"), cloud);
}

int cmd_synth(const fs::path& out, int frames, std::uint64_t seed, double sigma, double dropout,
              double dx, double dy, double theta) {
    if (dropout > 0.9) {
        std::cerr << "error: dropout " << dropout << " exceeds the supported maximum 0.9\n";
        return 1;
    }
    if (frames > 0) {
        // KITTI-layout mini sequence with two planted loops.
        ssc::SequenceSpec spec;
        spec.n_frames = frames;
        spec.seed = seed;
        spec.sigma = sigma;
        const ssc::SyntheticSequence seq = ssc::generate_sequence(spec);
        const fs::path seq_dir = out / "sequences" / "00";
        fs::create_directories(seq_dir / "velodyne");
        fs::create_directories(seq_dir / "labels");
        for (int k = 0; k < frames; ++k)
            export_frame(seq_dir, k, seq.frames[static_cast<std::size_t>(k)]);
        ssc::write_poses(seq_dir / "poses.txt", seq.poses);
        ssc::write_identity_calib(seq_dir / "calib.txt");
        json j;
        j["frames"] = frames;
        j["seed"] = seed;
        j["sigma"] = sigma;
        json loops = json::array();
        for (const auto& loop : spec.loops) {
            if (loop.later >= frames) continue;
            loops.push_back({{"earlier", loop.earlier},
                             {"later", loop.later},
                             {"offset_x", loop.offset_x},
                             {"offset_y", loop.offset_y},
                             {"heading_offset_deg", loop.heading_offset_deg}});
        }
        j["loops"] = loops;
        std::ofstream gt(out / "gt.json");
        gt << j.dump(2) << "\n";
        std::cout << j.dump() << "\n";
        return 0;
    }

    // Pair mode: a scene and its transformed copy.
    ssc::SceneSpec scene_spec;
    scene_spec.seed = seed;
    const ssc::LabeledCloud scene = ssc::generate_scene(scene_spec);
    ssc::OracleTransform t;
    t.dx = dx;
    t.dy = dy;
    t.theta_deg = theta;
    t.noise_sigma = sigma;
    t.dropout_rate = dropout;
    const ssc::LabeledCloud moved = ssc::apply_transform(scene, t, seed + 1);

    fs::create_directories(out);
    ssc::write_scan(out / "scan_a.bin", scene);
    ssc::write_labels(out / "scan_a.label", scene);
    ssc::write_scan(out / "scan_b.bin", moved);
    ssc::write_labels(out / "scan_b.label", moved);
    json j;
    // scan_b maps into scan_a's frame by the planted transform itself
    j["transform_b_to_a"] = {{"dx", dx}, {"dy", dy}, {"theta_deg", theta}};
    j["noise_sigma"] = sigma;
    j["dropout_rate"] = dropout;
    j["seed"] = seed;
    std::ofstream gt(out / "gt.json");
    gt << j.dump(2) << "\n";
    std::cout << j.dump() << "\n";
    return 0;
}

int cmd_bench(const fs::path& root, const std::string& sequence, int iters, const fs::path& out,
              const ParamFlags& params) {
    const ssc::MatchParams mp = params.match_params();
    std::vector<ssc::LabeledCloud> clouds;
    if (!root.empty()) {
        const ssc::SequenceIndex index = ssc::index_sequence(root, sequence);
        const std::size_t n = std::min<std::size_t>(index.size(), 20);
        for (std::size_t k = 0; k < n; ++k)
            clouds.push_back(load_pair(index.scans[k], index.labels[k]));
    } else {
        // Dense synthetic scenes around the paper-scale 120k points.
        for (std::uint64_t s = 0; s < 4; ++s) {
            ssc::SceneSpec spec;
            spec.walls = 40;
            spec.trunks = 60;
            spec.poles = 30;
            spec.signs = 20;
            spec.vegetation = 40;
            spec.cars = 20;
            spec.ground_density = 12.0;
            spec.extent = 90.0;
            spec.seed = 1000 + s;
            clouds.push_back(ssc::generate_scene(spec));
        }
    }
    if (clouds.size() < 2) {
        std::cerr << "error: bench needs at least two input clouds\n";
        return 1;
    }
    std::cerr << "bench input: " << clouds.size() << " clouds, "
              << clouds.front().size() << " points in the first\n";

    using Clock = std::chrono::steady_clock;
    auto ms_since = [](Clock::time_point t0) {
        return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
    };

    double describe_ms = 0.0;
    std::vector<ssc::SscDescriptor> descs;
    for (int it = 0; it < iters; ++it) {
        const auto& cloud = clouds[static_cast<std::size_t>(it) % clouds.size()];
        const auto t0 = Clock::now();
        ssc::SscDescriptor d = ssc::encode(cloud, mp.ssc, mp.priority);
        describe_ms += ms_since(t0);
        if (descs.size() < clouds.size()) descs.push_back(std::move(d));
    }
    describe_ms /= iters;

    double retrieve_ms = 0.0;
    double sink = 0.0;
    for (int it = 0; it < iters; ++it) {
        const auto& a = descs[static_cast<std::size_t>(it) % descs.size()];
        const auto& b = descs[static_cast<std::size_t>(it + 1) % descs.size()];
        const auto t0 = Clock::now();
        sink += ssc::similarity(a, b);
        retrieve_ms += ms_since(t0);
    }
    retrieve_ms /= iters;
    if (sink < -1.0) std::cerr << "";  // keep the scoring loop observable

    double icp_ms = 0.0;
    for (int it = 0; it < iters; ++it) {
        const auto& a = clouds[static_cast<std::size_t>(it) % clouds.size()];
        const auto& b = clouds[static_cast<std::size_t>(it + 1) % clouds.size()];
        const auto t0 = Clock::now();
        try {
            ssc::estimate_relative_pose(a, b, mp.sicp);
        } catch (const ssc::Error&) {
            // distant pairs may share no labels; the attempt is what we time
        }
        icp_ms += ms_since(t0);
    }
    icp_ms /= iters;

    std::ostringstream csv;
    csv << "stage,mean_ms,iterations\n";
    csv << "description," << describe_ms << ',' << iters << "\n";
    csv << "retrieval," << retrieve_ms << ',' << iters << "\n";
    csv << "icp," << icp_ms << ',' << iters << "\n";
    if (out.empty()) {
        std::cout << csv.str();
    } else {
        std::ofstream f(out);
        f << csv.str();
        std::cout << "{\"bench_csv\":\"" << out.string() << "\"}\n";
    }
    std::cerr << "description " << describe_ms << " ms, retrieval " << retrieve_ms
              << " ms, icp " << icp_ms << " ms\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Semantic scan context place recognition for LiDAR point clouds"};
    app.require_subcommand(1);
    app.set_config("--config", "", "Read defaults from a config file");
    app.allow_config_extras(CLI::config_extras_mode::ignore);

    auto* describe = app.add_subcommand("describe", "Encode one scan into a descriptor file");
    fs::path d_scan, d_labels, d_out = "descriptor.ssc", d_csv;
    ParamFlags d_params;
    describe->add_option("--scan", d_scan, "KITTI .bin scan")->required();
    describe->add_option("--labels", d_labels, "SemanticKITTI .label file")->required();
    describe->add_option("--out", d_out, "Output descriptor path");
    describe->add_option("--csv", d_csv, "Optional CSV export path");
    d_params.attach(describe);

    auto* match = app.add_subcommand("match", "Score one scan pair");
    fs::path m_scan_a, m_labels_a, m_scan_b, m_labels_b;
    ParamFlags m_params;
    AblationFlags m_ablation;
    match->add_option("--scan-a", m_scan_a)->required();
    match->add_option("--labels-a", m_labels_a)->required();
    match->add_option("--scan-b", m_scan_b)->required();
    match->add_option("--labels-b", m_labels_b)->required();
    m_params.attach(match);
    m_ablation.attach(match);

    auto* eval = app.add_subcommand("eval", "Run the pair-sampling evaluation on a sequence");
    fs::path e_root, e_out = "eval_out";
    std::string e_sequence = "00";
    double e_alpha = 100.0;
    std::uint64_t e_seed = 13;
    int e_min_gap = 100;
    int e_workers = 0;
    std::size_t e_cache = 192;
    ParamFlags e_params;
    AblationFlags e_ablation;
    eval->add_option("--dataset-root", e_root, "Dataset root with sequences/<seq>/")->required();
    eval->add_option("--sequence", e_sequence, "Sequence id, e.g. 00");
    eval->add_option("--alpha", e_alpha, "Negatives per positive");
    eval->add_option("--seed", e_seed, "Sampling seed");
    eval->add_option("--min-gap", e_min_gap, "Minimum frame gap for positive pairs");
    eval->add_option("--workers", e_workers, "Worker threads (0 = hardware)");
    eval->add_option("--cache", e_cache, "Frame cache capacity");
    eval->add_option("--out", e_out, "Report directory");
    e_params.attach(eval);
    e_ablation.attach(eval);

    auto* synth = app.add_subcommand("synth", "Export synthetic scenes in the KITTI byte formats");
    fs::path s_out = "synth_out";
    int s_frames = 0;
    std::uint64_t s_seed = 1;
    double s_sigma = 0.0, s_dropout = 0.0, s_dx = 0.0, s_dy = 0.0, s_theta = 0.0;
    synth->add_option("--out", s_out, "Output directory");
    synth->add_option("--frames", s_frames,
                      "Emit an n-frame planted-loop sequence instead of a pair");
    synth->add_option("--seed", s_seed, "Scene seed");
    synth->add_option("--sigma", s_sigma, "Gaussian noise sigma (m)");
    synth->add_option("--dropout", s_dropout, "Pair mode: dropout rate (max 0.9)");
    synth->add_option("--dx", s_dx, "Pair mode: planted x offset");
    synth->add_option("--dy", s_dy, "Pair mode: planted y offset");
    synth->add_option("--theta", s_theta, "Pair mode: planted yaw (deg)");

    auto* bench = app.add_subcommand("bench", "Per-stage timing over repeated runs");
    fs::path b_root, b_out;
    std::string b_sequence = "00";
    int b_iters = 100;
    ParamFlags b_params;
    bench->add_option("--dataset-root", b_root, "Optional dataset root (synthetic otherwise)");
    bench->add_option("--sequence", b_sequence, "Sequence id");
    bench->add_option("--iters", b_iters, "Iterations per stage (>= 100 recommended)")
        ->check(CLI::PositiveNumber);
    bench->add_option("--out", b_out, "CSV output path (stdout otherwise)");
    b_params.attach(bench);

    CLI11_PARSE(app, argc, argv);

    try {
        if (describe->parsed()) return cmd_describe(d_scan, d_labels, d_out, d_csv, d_params);
        if (match->parsed())
            return cmd_match(m_scan_a, m_labels_a, m_scan_b, m_labels_b, m_params, m_ablation);
        if (eval->parsed())
            return cmd_eval(e_root, e_sequence, e_out, e_alpha, e_seed, e_min_gap, e_workers,
                            e_cache, e_params, e_ablation);
        if (synth->parsed())
            return cmd_synth(s_out, s_frames, s_seed, s_sigma, s_dropout, s_dx, s_dy, s_theta);
        if (bench->parsed()) return cmd_bench(b_root, b_sequence, b_iters, b_out, b_params);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
