// Command-line surface for the 3D-Mirage evaluation toolkit.
// Every command is a deterministic function of its inputs and flags; result
// files are written atomically and embed the effective configuration.

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include "mirage/mirage.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json scores_to_json(const mirage::CompositeScores& s) {
    json j;
    j["d_cluster"] = s.d_cluster;
    j["d_avg"] = s.d_avg;
    j["dcs"] = s.dcs;
    j["D_cluster"] = s.D_cluster;
    j["D_avg"] = s.D_avg;
    j["ccs"] = s.ccs;
    return j;
}

json branch_to_json(const mirage::BranchTerms& b) {
    json j;
    j["hkr_flat"] = b.hkr.hkr_flat;
    j["hkr_mixture"] = b.hkr.hkr_mixture;
    j["hkr"] = b.hkr.hkr;
    j["t3"] = b.nkp.t3;
    j["t4"] = b.nkp.t4;
    j["t5"] = b.nkp.t5;
    j["t6"] = b.nkp.t6;
    j["t7"] = b.nkp.t7;
    j["nkp"] = b.nkp.nkp;
    j["ce"] = b.gate.ce;
    j["entropy"] = b.gate.entropy;
    j["anchor"] = b.gate.anchor;
    j["gating_reg"] = b.gating_reg;
    j["total"] = b.total;
    j["ell"] = b.resid.ell;
    j["ell_null"] = b.resid.ell_null;
    j["sigmas"] = b.mixture.sigmas;
    j["mu_b"] = b.mu_b;
    j["sigma_b"] = b.sigma_b;
    j["empty_masks"] = b.nkp.empty_masks;
    return j;
}

int cmd_synth(const mirage::FixtureSpec& spec, const std::string& out_dir) {
    mirage::write_fixture_tree(spec, out_dir);
    std::cout << "synth: wrote " << spec.samples << " sample(s) to " << out_dir << "\n";
    return 0;
}

int cmd_crops(const std::string& manifest_path, int per_sample, double min_diag_frac,
              std::uint64_t seed, const std::string& out_path) {
    mirage::BenchmarkManifest m = mirage::load_manifest(manifest_path);
    for (auto& s : m.samples) {
        if (s.rois.empty()) continue;
        s.crops = mirage::generate_crops(s.rois[0], s.width, s.height, per_sample,
                                         min_diag_frac, seed);
        for (auto& [role, binding] : s.depth) binding.crops.clear();
    }
    fs::path out = out_path.empty() ? fs::path(manifest_path) : fs::path(out_path);
    mirage::write_atomic(out, mirage::canonical_dump(mirage::manifest_to_json(m)));
    std::cout << "crops: updated " << m.samples.size() << " sample(s) in " << out << "\n";
    return 0;
}

int cmd_eval(const std::string& manifest_path, const std::string& role,
             const std::string& out_path, const std::string& scatter_path, bool per_roi_norm) {
    mirage::BenchmarkManifest m = mirage::load_manifest(manifest_path);
    mirage::EvalOptions opt;
    opt.scope = per_roi_norm ? mirage::NormScope::PerRoi : mirage::NormScope::PerView;
    mirage::BenchmarkResult res = mirage::benchmark_scores(m, role, opt);

    json doc;
    doc["version"] = mirage::kToolkitVersion;
    doc["command"] = "eval";
    doc["config"] = {{"manifest", manifest_path},
                     {"role", role},
                     {"normalization", per_roi_norm ? "per_roi" : "per_view"},
                     {"lo_pct", opt.lo_pct},
                     {"hi_pct", opt.hi_pct},
                     {"aggregation", "mean_over_units"}};
    doc["aggregate"] = scores_to_json(res.aggregate);
    doc["units"] = json::array();
    for (const auto& u : res.units) {
        json ju = scores_to_json(u.scores);
        ju["unit"] = u.unit_id();
        ju["t_full"] = u.t_full;
        ju["t_crop"] = u.t_crop;
        ju["m_full"] = u.m_full;
        ju["m_crop"] = u.m_crop;
        doc["units"].push_back(ju);
    }
    mirage::save_results(doc, out_path);
    if (!scatter_path.empty())
        mirage::write_atomic(scatter_path, mirage::scatter_export(res.units));
    std::cout << "eval: " << res.units.size() << " units, DCS " << res.aggregate.dcs
              << ", CCS " << res.aggregate.ccs << " -> " << out_path << "\n";
    return 0;
}

int cmd_align(const std::string& manifest_path, const std::string& student_role,
              const std::string& teacher_role, const std::string& out_path,
              const std::string& heatmap_dir) {
    mirage::BenchmarkManifest m = mirage::load_manifest(manifest_path);
    json doc;
    doc["version"] = mirage::kToolkitVersion;
    doc["command"] = "align";
    doc["config"] = {{"manifest", manifest_path},
                     {"student", student_role},
                     {"teacher", teacher_role},
                     {"heatmap_lo_pct", 2.0},
                     {"heatmap_hi_pct", 98.0}};
    doc["samples"] = json::array();
    double sum_a = 0.0, sum_r2 = 0.0;
    std::size_t n = 0;
    for (const auto& s : m.samples) {
        if (!s.depth.count(student_role) || !s.depth.count(teacher_role)) continue;
        mirage::DepthMap st = mirage::load_role_full(m, s, student_role);
        mirage::DepthMap te = mirage::load_role_full(m, s, teacher_role);
        if (st.width != s.width || st.height != s.height)
            st = mirage::resample_bilinear(st, s.width, s.height);
        if (te.width != s.width || te.height != s.height)
            te = mirage::resample_bilinear(te, s.width, s.height);
        mirage::MaskRaster bg(s.width, s.height, true);
        for (const auto& roi : s.rois)
            bg = bg.minus(mirage::rasterize_roi(roi, s.width, s.height));
        mirage::AffineFit fit = mirage::fit_affine_background(st, te, bg);
        json js;
        js["id"] = s.id;
        js["a"] = fit.a;
        js["b"] = fit.b;
        js["r2_percent"] = fit.r2 * 100.0;
        js["n"] = fit.n;
        doc["samples"].push_back(js);
        sum_a += fit.a;
        sum_r2 += fit.r2;
        ++n;
        if (!heatmap_dir.empty()) {
            mirage::DepthMap heat = mirage::error_heatmap(st, te, fit);
            fs::create_directories(heatmap_dir);
            mirage::save_pfm(heat, fs::path(heatmap_dir) / (s.id + "_heatmap.pfm"));
        }
    }
    if (n == 0) mirage::fail("SpecError", "no sample has both roles");
    doc["aggregate"] = {{"mean_a", sum_a / n},
                        {"abs_one_minus_mean_a", std::fabs(1.0 - sum_a / n)},
                        {"mean_r2_percent", sum_r2 / n * 100.0},
                        {"samples", n}};
    mirage::save_results(doc, out_path);
    std::cout << "align: " << n << " sample(s), mean R2 " << sum_r2 / n * 100.0 << "% -> "
              << out_path << "\n";
    return 0;
}

int cmd_ordinal(const std::string& gt_path, const std::string& pred_path, std::uint64_t pairs,
                double tau, std::uint64_t seed, const std::string& out_path) {
    mirage::DepthMap gt = mirage::load_depth(gt_path);
    mirage::DepthMap pred = mirage::load_depth(pred_path);
    mirage::OrdinalResult r = mirage::pairwise_accuracy(gt, pred, pairs, tau, seed);
    json doc;
    doc["version"] = mirage::kToolkitVersion;
    doc["command"] = "ordinal";
    doc["config"] = {{"gt", gt_path}, {"pred", pred_path}, {"pairs", pairs},
                     {"tau", tau}, {"seed", seed}};
    doc["accuracy"] = r.accuracy;
    doc["pairs_retained"] = r.pairs_retained;
    doc["tau"] = tau;
    doc["seed"] = seed;
    if (!out_path.empty()) mirage::save_results(doc, out_path);
    std::cout << "ordinal: accuracy " << r.accuracy << " over " << r.pairs_retained
              << " retained pair(s)\n";
    return 0;
}

int cmd_loss(const std::string& manifest_path, const std::string& student_role,
             const std::string& teacher_role, const std::string& config_path,
             const std::string& out_path) {
    mirage::BenchmarkManifest m = mirage::load_manifest(manifest_path);
    mirage::LossConfig cfg =
        config_path.empty() ? mirage::LossConfig{} : mirage::load_loss_config(config_path);

    json doc;
    doc["version"] = mirage::kToolkitVersion;
    doc["command"] = "loss";
    doc["config"] = mirage::loss_config_to_json(cfg);
    doc["config"]["manifest"] = manifest_path;
    doc["config"]["student"] = student_role;
    doc["config"]["teacher"] = teacher_role;
    doc["samples"] = json::array();

    double sum_total = 0.0, sum_hkr = 0.0, sum_nkp = 0.0;
    std::size_t n = 0;
    for (const auto& s : m.samples) {
        if (!s.depth.count(student_role) || !s.depth.count(teacher_role)) continue;
        if (s.rois.empty()) continue;
        mirage::DepthMap st = mirage::load_role_full(m, s, student_role);
        mirage::DepthMap te = mirage::load_role_full(m, s, teacher_role);
        mirage::MaskRaster roi = mirage::rasterize_roi(s.rois[0], s.width, s.height);
        mirage::BranchTerms full = mirage::evaluate_branch(st, te, roi, !s.negative, cfg);

        std::optional<mirage::BranchTerms> crop;
        const auto& sb = s.depth.at(student_role);
        const auto& tb = s.depth.at(teacher_role);
        for (const auto& rect : s.crops) {
            if (!sb.crops.count(rect.id) || !tb.crops.count(rect.id)) continue;
            mirage::DepthMap sc = mirage::load_role_crop(m, s, student_role, rect.id);
            mirage::DepthMap tc = mirage::load_role_crop(m, s, teacher_role, rect.id);
            mirage::DepthMap sm = mirage::map_crop_to_full(sc, rect, s.width, s.height);
            mirage::DepthMap tm = mirage::map_crop_to_full(tc, rect, s.width, s.height);
            crop = mirage::evaluate_branch(sm, tm, roi, !s.negative, cfg);
            break; // first bound crop defines the crop branch
        }
        mirage::LossBreakdown lb = mirage::total_loss(crop, full, cfg.lambda_f);

        json js;
        js["id"] = s.id;
        js["negative"] = s.negative;
        js["full"] = branch_to_json(lb.full);
        if (lb.has_crop) js["crop"] = branch_to_json(lb.crop);
        js["total"] = lb.total;
        doc["samples"].push_back(js);
        sum_total += lb.total;
        sum_hkr += lb.full.hkr.hkr;
        sum_nkp += lb.full.nkp.nkp;
        ++n;
    }
    if (n == 0) mirage::fail("SpecError", "no sample has both roles");
    doc["aggregate"] = {{"mean_total", sum_total / n},
                        {"mean_full_hkr", sum_hkr / n},
                        {"mean_full_nkp", sum_nkp / n},
                        {"samples", n}};
    mirage::save_results(doc, out_path);
    std::cout << "loss: " << n << " sample(s), mean total " << sum_total / n << " -> "
              << out_path << "\n";
    return 0;
}

int cmd_report(const std::string& baseline_path, const std::string& ours_path,
               const std::string& out_path) {
    std::map<std::string, double> base = mirage::extract_metrics(mirage::load_results(baseline_path));
    std::map<std::string, double> ours = mirage::extract_metrics(mirage::load_results(ours_path));
    std::vector<std::string> keys;
    for (const auto& [k, v] : base)
        if (ours.count(k)) keys.push_back(k);
    if (keys.empty()) mirage::fail("MissingMetric", "no shared metrics between result sets");
    auto rows = mirage::delta_report(base, ours, keys);

    json doc;
    doc["version"] = mirage::kToolkitVersion;
    doc["command"] = "report";
    doc["config"] = {{"baseline", baseline_path}, {"ours", ours_path}};
    doc["rows"] = json::array();
    std::cout << "metric            baseline         ours             delta%\n";
    for (const auto& r : rows) {
        json jr;
        jr["metric"] = r.metric;
        jr["baseline"] = r.baseline;
        jr["ours"] = r.ours;
        jr["delta_percent"] = r.delta_percent;
        jr["rendered"] = r.rendered;
        doc["rows"].push_back(jr);
        std::printf("%-16s  %-15.6g  %-15.6g  %s%%\n", r.metric.c_str(), r.baseline, r.ours,
                    r.rendered.c_str());
    }
    if (!out_path.empty()) mirage::save_results(doc, out_path);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"3D-Mirage depth hallucination evaluation toolkit"};
    app.require_subcommand(1);

    // synth
    auto* synth = app.add_subcommand("synth", "generate a synthetic benchmark tree");
    std::string synth_preset = "planar", synth_out, synth_edit = "none";
    mirage::FixtureSpec spec;
    synth->add_option("--preset", synth_preset,
                      "planar|bump|crop_only_bump|piecewise_planes|noise");
    synth->add_option("--out", synth_out, "output directory")->required();
    synth->add_option("--seed", spec.seed, "generator seed");
    synth->add_option("--samples", spec.samples, "sample count");
    synth->add_option("--width", spec.width, "frame width");
    synth->add_option("--height", spec.height, "frame height");
    synth->add_option("--per-sample", spec.crops_per_sample, "crops per sample (planar preset)");
    synth->add_option("--min-diag-frac", spec.min_diag_frac, "crop diagonal fraction");
    synth->add_option("--amp", spec.bump_amp, "bump amplitude");
    synth->add_option("--sigma", spec.bump_sigma, "bump sigma in pixels (0 = auto)");
    synth->add_option("--noise-sigma", spec.noise_sigma, "noise sigma");
    synth->add_option("--delta", spec.offset_delta, "background offset for edit=offset_bg");
    synth->add_option("--edit", synth_edit, "student edit: none|flatten_roi|flatten_everywhere|offset_bg");
    synth->add_option("--ring-width", spec.ring_width, "ring width in pixels");
    synth->add_option("--guard-width", spec.guard_width, "guard width in pixels");

    // crops
    auto* crops = app.add_subcommand("crops", "regenerate ROI-centered crops in a manifest");
    std::string crops_manifest, crops_out;
    int crops_per_sample = 4;
    double crops_frac = 0.4;
    std::uint64_t crops_seed = 0;
    crops->add_option("--manifest", crops_manifest)->required();
    crops->add_option("--per-sample", crops_per_sample);
    crops->add_option("--min-diag-frac", crops_frac);
    crops->add_option("--seed", crops_seed)->required();
    crops->add_option("--out", crops_out, "output manifest (default: in place)");

    // eval
    auto* eval = app.add_subcommand("eval", "compute DCS/CCS over a manifest");
    std::string eval_manifest, eval_role, eval_out, eval_scatter;
    bool eval_per_roi = false;
    eval->add_option("--manifest", eval_manifest)->required();
    eval->add_option("--role", eval_role)->required();
    eval->add_option("--out", eval_out)->required();
    eval->add_option("--scatter", eval_scatter, "CSV of per-unit (full, crop) responses");
    eval->add_flag("--per-roi-norm", eval_per_roi, "percentiles from ROI pixels instead of the view");

    // align
    auto* align = app.add_subcommand("align", "background affine fit of student to teacher");
    std::string al_manifest, al_student, al_teacher, al_out, al_heatmaps;
    align->add_option("--manifest", al_manifest)->required();
    align->add_option("--student", al_student)->required();
    align->add_option("--teacher", al_teacher)->required();
    align->add_option("--out", al_out)->required();
    align->add_option("--heatmaps", al_heatmaps, "directory for per-sample error heatmaps");

    // ordinal
    auto* ordinal = app.add_subcommand("ordinal", "pairwise ordinal accuracy of a prediction");
    std::string or_gt, or_pred, or_out;
    std::uint64_t or_pairs = 50000, or_seed = 0;
    double or_tau = 0.01;
    ordinal->add_option("--gt", or_gt)->required();
    ordinal->add_option("--pred", or_pred)->required();
    ordinal->add_option("--pairs", or_pairs);
    ordinal->add_option("--tau", or_tau);
    ordinal->add_option("--seed", or_seed)->required();
    ordinal->add_option("--out", or_out);

    // loss
    auto* loss = app.add_subcommand("loss", "itemized self-distillation loss terms");
    std::string lo_manifest, lo_student, lo_teacher, lo_config, lo_out;
    loss->add_option("--manifest", lo_manifest)->required();
    loss->add_option("--student", lo_student)->required();
    loss->add_option("--teacher", lo_teacher)->required();
    loss->add_option("--config", lo_config, "loss configuration file (JSON)");
    loss->add_option("--out", lo_out)->required();

    // report
    auto* report = app.add_subcommand("report", "relative-improvement table of two result files");
    std::string rp_base, rp_ours, rp_out;
    report->add_option("--baseline", rp_base)->required();
    report->add_option("--ours", rp_ours)->required();
    report->add_option("--out", rp_out);

    CLI11_PARSE(app, argc, argv);

    try {
        if (synth->parsed()) {
            spec.preset = mirage::preset_from_string(synth_preset);
            spec.edit = mirage::edit_from_string(synth_edit);
            return cmd_synth(spec, synth_out);
        }
        if (crops->parsed())
            return cmd_crops(crops_manifest, crops_per_sample, crops_frac, crops_seed, crops_out);
        if (eval->parsed())
            return cmd_eval(eval_manifest, eval_role, eval_out, eval_scatter, eval_per_roi);
        if (align->parsed())
            return cmd_align(al_manifest, al_student, al_teacher, al_out, al_heatmaps);
        if (ordinal->parsed())
            return cmd_ordinal(or_gt, or_pred, or_pairs, or_tau, or_seed, or_out);
        if (loss->parsed())
            return cmd_loss(lo_manifest, lo_student, lo_teacher, lo_config, lo_out);
        if (report->parsed()) return cmd_report(rp_base, rp_ours, rp_out);
    } catch (const mirage::Error& e) {
        std::cerr << "ERROR:" << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "ERROR:Internal: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
