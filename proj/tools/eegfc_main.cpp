// eegfc: batch front door for the seizure-forecasting pipeline.
//
// Stages communicate through files in a working directory (--out):
//   synth      -> recording.edf, annotations.csv
//   preprocess -> clean.eegraw, noise_bands.csv
//   tokenize   -> tokens.tok
//   pretrain   -> model_pretrain.ckpt, pretrain_curve.csv
//   finetune   -> model_finetune.ckpt, finetune_curve.csv, finetune_metrics.json
//   predict    -> timeline.csv
//   evaluate   -> event_report.json
//   report     -> report.csv (aggregates one row per patient directory)
//
// Every command echoes the effective configuration (defaults < --config file <
// flags) into <out>/effective_config.txt and exits 0 on success, 1 on usage
// errors, 2 on malformed input files, 3 on numerical failure, with a one-line
// reason on stderr.

#include <CLI11.hpp>
#include <json.hpp>

#include "eegfc/checkpoint.hpp"
#include "eegfc/config.hpp"
#include "eegfc/edf.hpp"
#include "eegfc/error.hpp"
#include "eegfc/evalalarm.hpp"
#include "eegfc/net.hpp"
#include "eegfc/recording.hpp"
#include "eegfc/spectral.hpp"
#include "eegfc/split.hpp"
#include "eegfc/synth.hpp"
#include "eegfc/tokenizer.hpp"
#include "eegfc/train.hpp"

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace eegfc;

namespace {

struct CommonArgs {
    std::string out;
    std::string config_path;
    int64_t seed = -1; // -1 = not given
    std::vector<std::string> set_kv;
};

void add_common(CLI::App* cmd, CommonArgs& a) {
    cmd->add_option("--out", a.out, "working directory for stage artifacts")->required();
    cmd->add_option("--config", a.config_path, "config file with 'key = value' lines");
    cmd->add_option("--seed", a.seed, "seed for all stochastic stages");
    cmd->add_option("--set", a.set_kv, "override a single config key (key=value, repeatable)");
}

ConfigSet build_config(const CommonArgs& a) {
    ConfigSet cs = ConfigSet::defaults();
    if (!a.config_path.empty()) cs.apply_file(a.config_path);
    for (const std::string& kv : a.set_kv) {
        const size_t eq = kv.find('=');
        if (eq == std::string::npos || eq == 0 || eq + 1 == kv.size())
            fail_usage("--set expects key=value, got '" + kv + "'");
        cs.set(kv.substr(0, eq), kv.substr(eq + 1), ConfigSource::flag);
    }
    if (a.seed >= 0) cs.set("seed", std::to_string(a.seed), ConfigSource::flag);
    return cs;
}

// Creates the working directory and echoes the effective configuration into it.
void prepare_outdir(const std::string& out, const ConfigSet& cs) {
    std::error_code ec;
    fs::create_directories(out, ec);
    if (ec) fail_usage("cannot create output directory '" + out + "': " + ec.message());
    write_file_text(out + "/effective_config.txt", cs.render_effective());
}

std::string pick(const std::string& flag_value, const std::string& fallback) {
    return flag_value.empty() ? fallback : flag_value;
}

void require_input(const std::string& path, const std::string& cmd, const std::string& hint) {
    if (!fs::exists(path))
        fail_usage(cmd + ": input not found: " + path + " (" + hint + ")");
}

ModelConfig model_config_from(const ConfigSet& cs, int channels) {
    ModelConfig mc;
    mc.vocab = cs.get_int("levels");
    mc.d_model = cs.get_int("d_model");
    mc.n_layers = cs.get_int("n_layers");
    mc.n_heads = cs.get_int("n_heads");
    mc.block_size = cs.get_int("block_size");
    mc.frame_len = cs.get_int("frame_len");
    mc.channels = channels;
    mc.dropout_pretrain = cs.get_double("dropout_pretrain");
    mc.dropout_finetune = cs.get_double("dropout_finetune");
    mc.validate();
    return mc;
}

// Loads a checkpoint, rebuilds the model and tokenizer it was trained with.
struct LoadedModel {
    Model<float> model;
    TokenizerState tok;
    double fs = 0.0;
    CheckpointMeta meta;
};

LoadedModel load_model(const std::string& path, uint64_t init_seed) {
    const std::vector<uint8_t> bytes = read_file_bytes(path);
    CheckpointMeta meta = read_checkpoint_meta(bytes);
    ModelConfig mc = model_config_from_meta(meta);
    LoadedModel lm{Model<float>(mc), tokenizer_from_meta(meta), 0.0, meta};
    lm.model.init_weights(init_seed);
    read_checkpoint_into(lm.model, bytes);
    auto it = meta.find("fs");
    if (it != meta.end()) lm.fs = std::stod(it->second);
    return lm;
}

nlohmann::ordered_json metrics_json(const BinMetrics& m) {
    nlohmann::ordered_json j;
    j["tp"] = m.tp;
    j["fp"] = m.fp;
    j["tn"] = m.tn;
    j["fn"] = m.fn;
    j["acc"] = m.acc;
    j["prec"] = m.prec;
    j["rec"] = m.rec;
    j["f1"] = m.f1;
    return j;
}

BinMetrics metrics_from_json(const nlohmann::json& j) {
    BinMetrics m;
    m.tp = j.at("tp").get<int>();
    m.fp = j.at("fp").get<int>();
    m.tn = j.at("tn").get<int>();
    m.fn = j.at("fn").get<int>();
    m.acc = j.at("acc").get<double>();
    m.prec = j.at("prec").get<double>();
    m.rec = j.at("rec").get<double>();
    m.f1 = j.at("f1").get<double>();
    return m;
}

// ---------------------------------------------------------------- commands

void cmd_synth(const CommonArgs& a, double line_noise_hz, double line_noise_gain) {
    ConfigSet cs = build_config(a);
    prepare_outdir(a.out, cs);
    SynthConfig sc;
    sc.channels = cs.get_int("channels");
    sc.fs = cs.get_double("fs");
    sc.duration_s = cs.get_double("duration_s");
    sc.n_seizures = cs.get_int("n_seizures");
    sc.line_noise_hz = line_noise_hz;
    sc.line_noise_gain = line_noise_gain;
    sc.seed = cs.get_u64("seed");
    SynthResult r = synthesize_patient(sc);
    save_edf(r.recording, a.out + "/recording.edf");
    save_annotations_csv(r.annotations, a.out + "/annotations.csv");
    std::printf("synth: %d ch, %.0f s at %g Hz, %zu events -> %s/recording.edf\n", sc.channels,
                sc.duration_s, sc.fs, r.annotations.size(), a.out.c_str());
}

void cmd_preprocess(const CommonArgs& a, const std::string& rec_flag) {
    ConfigSet cs = build_config(a);
    prepare_outdir(a.out, cs);
    const std::string rec_path = pick(rec_flag, a.out + "/recording.edf");
    require_input(rec_path, "preprocess", "run synth first or pass --rec");
    Recording rec = load_recording(rec_path);
    auto [clean, bands] = apply_preprocessing(rec);
    save_eegraw(clean, a.out + "/clean.eegraw");
    write_file_text(a.out + "/noise_bands.csv", write_bands_csv(bands));
    std::printf("preprocess: %zu noise band(s) removed -> %s/clean.eegraw\n", bands.size(),
                a.out.c_str());
}

void cmd_tokenize(const CommonArgs& a, const std::string& rec_flag) {
    ConfigSet cs = build_config(a);
    prepare_outdir(a.out, cs);
    const std::string rec_path = pick(rec_flag, a.out + "/clean.eegraw");
    require_input(rec_path, "tokenize", "run preprocess first or pass --rec");
    Recording rec = load_recording(rec_path);
    TokenizerState st = fit_tokenizer(rec, cs.get_int("levels"), cs.get_double("clip_sigma"));
    TokenStream ts = tokenize_recording(rec, st);
    save_tok(ts, a.out + "/tokens.tok");
    std::printf("tokenize: %lld tokens (mu %.4g, sigma %.4g) -> %s/tokens.tok\n",
                static_cast<long long>(ts.size()), st.mu, st.sigma, a.out.c_str());
}

void cmd_pretrain(const CommonArgs& a, const std::string& tokens_flag) {
    ConfigSet cs = build_config(a);
    prepare_outdir(a.out, cs);
    const std::string tok_path = pick(tokens_flag, a.out + "/tokens.tok");
    require_input(tok_path, "pretrain", "run tokenize first or pass --tokens");
    TokenStream stream = load_tok(tok_path);

    ModelConfig mc = model_config_from(cs, stream.channels);
    Model<float> m(mc);
    m.init_weights(cs.get_u64("seed"));

    PretrainConfig pc;
    pc.steps = cs.get_int("pretrain_steps");
    pc.batch_size = cs.get_int("batch_size");
    pc.grad_accum = cs.get_int("accum_pretrain");
    pc.lr = cs.get_double("lr_pretrain");
    pc.weight_decay = cs.get_double("weight_decay");
    pc.lambda_mse = cs.get_double("lambda_mse");
    pc.dropout = cs.get_double("dropout_pretrain");
    pc.seed = cs.get_u64("seed");
    std::vector<PretrainRow> rows = pretrain(m, stream, pc);

    save_checkpoint_file(m, make_model_meta(mc, stream.state, stream.fs, "pretrain"),
                         a.out + "/model_pretrain.ckpt");
    write_file_text(a.out + "/pretrain_curve.csv", write_pretrain_curve_csv(rows));
    const double final_ce = rows.empty() ? 0.0 : rows.back().ce;
    std::printf("pretrain: %d steps, final ce %.4f -> %s/model_pretrain.ckpt\n", pc.steps, final_ce,
                a.out.c_str());
}

void cmd_finetune(const CommonArgs& a, const std::string& ckpt_flag, const std::string& rec_flag,
                  const std::string& ann_flag) {
    ConfigSet cs = build_config(a);
    prepare_outdir(a.out, cs);
    const std::string ckpt_path = pick(ckpt_flag, a.out + "/model_pretrain.ckpt");
    const std::string rec_path = pick(rec_flag, a.out + "/clean.eegraw");
    const std::string ann_path = pick(ann_flag, a.out + "/annotations.csv");
    require_input(ckpt_path, "finetune", "run pretrain first or pass --checkpoint");
    require_input(rec_path, "finetune", "run preprocess first or pass --rec");
    require_input(ann_path, "finetune", "run synth first or pass --ann");

    LoadedModel lm = load_model(ckpt_path, cs.get_u64("seed"));
    Recording rec = load_recording(rec_path);
    std::vector<SeizureAnnotation> anns = load_annotations_csv(ann_path);

    std::vector<Segment> segments =
        segment_recording(rec, cs.get_double("seg_dur_s"), cs.get_double("train_overlap"));
    label_segments(segments, anns, cs.get_double("horizon_s"));
    SplitPlan split = make_split(segments, cs.get_double("val_frac"), cs.get_u64("seed"));

    FinetuneConfig fc;
    fc.steps = cs.get_int("finetune_steps");
    fc.batch_size = cs.get_int("batch_size");
    fc.grad_accum = cs.get_int("accum_finetune");
    fc.lr = cs.get_double("lr_finetune");
    fc.weight_decay = cs.get_double("weight_decay");
    fc.dropout = cs.get_double("dropout_finetune");
    fc.eval_every = cs.get_int("eval_every");
    fc.backbone_frozen = cs.get_bool("backbone_frozen");
    fc.threshold = cs.get_double("threshold");
    fc.seed = cs.get_u64("seed");
    FinetuneResult res = finetune(lm.model, segments, split, lm.tok, fc);

    save_checkpoint_file(lm.model, make_model_meta(lm.model.cfg, lm.tok, rec.fs, "finetune"),
                         a.out + "/model_finetune.ckpt");
    write_file_text(a.out + "/finetune_curve.csv", write_finetune_curve_csv(res.curve));

    nlohmann::ordered_json j;
    j["best_step"] = res.best_step;
    j["w0"] = res.w0;
    j["w1"] = res.w1;
    j["train"] = metrics_json(res.best_train);
    j["val"] = metrics_json(res.best_val);
    j["split"] = {{"n_pos_train", split.n_pos_train},
                  {"n_neg_train", split.n_neg_train},
                  {"n_pos_val", split.n_pos_val},
                  {"n_neg_val", split.n_neg_val},
                  {"n_dropped", static_cast<int>(split.dropped_idx.size())}};
    write_file_text(a.out + "/finetune_metrics.json", j.dump(2) + "\n");
    std::printf("finetune: best step %d, val acc %.4f f1 %.4f -> %s/model_finetune.ckpt\n",
                res.best_step, res.best_val.acc, res.best_val.f1, a.out.c_str());
}

void cmd_predict(const CommonArgs& a, const std::string& ckpt_flag, const std::string& rec_flag) {
    ConfigSet cs = build_config(a);
    prepare_outdir(a.out, cs);
    const std::string ckpt_path = pick(ckpt_flag, a.out + "/model_finetune.ckpt");
    const std::string rec_path = pick(rec_flag, a.out + "/clean.eegraw");
    require_input(ckpt_path, "predict", "run finetune first or pass --checkpoint");
    require_input(rec_path, "predict", "run preprocess first or pass --rec");

    LoadedModel lm = load_model(ckpt_path, cs.get_u64("seed"));
    Recording rec = load_recording(rec_path);
    if (lm.fs > 0.0 && std::abs(lm.fs - rec.fs) > 1e-9)
        fail_usage("predict: recording rate " + std::to_string(rec.fs) +
                   " Hz differs from the model's training rate " + std::to_string(lm.fs) + " Hz");

    AlarmTimeline tl = infer_timeline(lm.model, rec, lm.tok, cs.get_double("seg_dur_s"),
                                      cs.get_double("infer_overlap"), cs.get_double("threshold"));
    write_file_text(a.out + "/timeline.csv", write_timeline_csv(tl));
    size_t alarms = 0;
    for (const auto& e : tl.entries) alarms += e.alarm ? 1 : 0;
    std::printf("predict: %zu windows, %zu alarm(s) -> %s/timeline.csv\n", tl.entries.size(), alarms,
                a.out.c_str());
}

void cmd_evaluate(const CommonArgs& a, const std::string& tl_flag, const std::string& ann_flag,
                  const std::string& rec_flag) {
    ConfigSet cs = build_config(a);
    prepare_outdir(a.out, cs);
    const std::string tl_path = pick(tl_flag, a.out + "/timeline.csv");
    const std::string ann_path = pick(ann_flag, a.out + "/annotations.csv");
    const std::string rec_path = pick(rec_flag, a.out + "/clean.eegraw");
    require_input(tl_path, "evaluate", "run predict first or pass --timeline");
    require_input(ann_path, "evaluate", "run synth first or pass --ann");
    require_input(rec_path, "evaluate", "run preprocess first or pass --rec");

    AlarmTimeline tl = parse_timeline_csv(read_file_text(tl_path));
    std::vector<double> onsets = merged_onsets(load_annotations_csv(ann_path));
    Recording rec = load_recording(rec_path); // duration defines the FAR denominator
    EventReport rep = match_events(tl, onsets, rec.duration_s(), cs.get_double("horizon_s"));
    write_file_text(a.out + "/event_report.json", write_event_report_json(rep));
    std::printf("evaluate: far %.2f/h, sensitivity %s -> %s/event_report.json\n", rep.far_per_h,
                rep.has_sensitivity ? (std::to_string(rep.sensitivity_pct) + "%").c_str() : "n/a",
                a.out.c_str());
}

void cmd_report(const CommonArgs& a, const std::vector<std::string>& patient_dirs) {
    ConfigSet cs = build_config(a);
    prepare_outdir(a.out, cs);
    std::string csv = "patient,train_acc,val_acc,precision,recall,f1,far_per_h,pdelay_s,sens_pct\n";
    for (const std::string& dir : patient_dirs) {
        const std::string metrics_path = dir + "/finetune_metrics.json";
        const std::string report_path = dir + "/event_report.json";
        require_input(metrics_path, "report", "run finetune in that directory first");
        require_input(report_path, "report", "run evaluate in that directory first");

        nlohmann::json mj;
        try {
            mj = nlohmann::json::parse(read_file_text(metrics_path));
        } catch (const nlohmann::json::exception& e) {
            fail_format(metrics_path + ": " + e.what());
        }
        const BinMetrics train = metrics_from_json(mj.at("train"));
        const BinMetrics val = metrics_from_json(mj.at("val"));
        EventReport rep = parse_event_report_json(read_file_text(report_path));

        std::string patient = fs::path(dir).filename().string();
        if (patient.empty()) patient = fs::path(dir).parent_path().filename().string();
        char row[256];
        std::snprintf(row, sizeof(row), "%s,%.4f,%.4f,%.4f,%.4f,%.4f,%.2f,", patient.c_str(),
                      train.acc, val.acc, val.prec, val.rec, val.f1, rep.far_per_h);
        csv += row;
        if (rep.has_delay)
            std::snprintf(row, sizeof(row), "%.2f,", rep.mean_delay_s);
        else
            std::snprintf(row, sizeof(row), "n/a,");
        csv += row;
        if (rep.has_sensitivity)
            std::snprintf(row, sizeof(row), "%.1f\n", rep.sensitivity_pct);
        else
            std::snprintf(row, sizeof(row), "n/a\n");
        csv += row;
    }
    write_file_text(a.out + "/report.csv", csv);
    std::printf("report: %zu patient(s) -> %s/report.csv\n", patient_dirs.size(), a.out.c_str());
}

const char* kind_name(ErrorKind k) {
    switch (k) {
        case ErrorKind::usage: return "usage";
        case ErrorKind::format: return "format";
        case ErrorKind::numeric: return "numeric";
    }
    return "?";
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"eegfc: EEG seizure-forecasting pipeline (synthesis, preprocessing, "
                 "tokenization, pretraining, fine-tuning, prediction, evaluation)"};
    app.require_subcommand(1);

    CommonArgs synth_a, pre_a, tok_a, pt_a, ft_a, pred_a, eval_a, rep_a;
    double line_noise_hz = 0.0, line_noise_gain = 0.5;
    std::string pre_rec, tok_rec, pt_tokens, ft_ckpt, ft_rec, ft_ann, pred_ckpt, pred_rec;
    std::string eval_tl, eval_ann, eval_rec;
    std::vector<std::string> patient_dirs;

    CLI::App* c_synth = app.add_subcommand("synth", "generate a synthetic patient recording");
    add_common(c_synth, synth_a);
    c_synth->add_option("--line-noise-hz", line_noise_hz, "inject a coherent tone (0 = clean)");
    c_synth->add_option("--line-noise-gain", line_noise_gain, "tone amplitude relative to RMS");

    CLI::App* c_pre = app.add_subcommand("preprocess", "detect and notch out noise bands");
    add_common(c_pre, pre_a);
    c_pre->add_option("--rec", pre_rec, "input recording (.edf or .eegraw)");

    CLI::App* c_tok = app.add_subcommand("tokenize", "fit the quantizer and tokenize the recording");
    add_common(c_tok, tok_a);
    c_tok->add_option("--rec", tok_rec, "input recording (.edf or .eegraw)");

    CLI::App* c_pt = app.add_subcommand("pretrain", "next-sample pretraining on the token stream");
    add_common(c_pt, pt_a);
    c_pt->add_option("--tokens", pt_tokens, "input token stream (.tok)");

    CLI::App* c_ft = app.add_subcommand("finetune", "train the classifier head on labeled windows");
    add_common(c_ft, ft_a);
    c_ft->add_option("--checkpoint", ft_ckpt, "pretraining checkpoint");
    c_ft->add_option("--rec", ft_rec, "input recording (.edf or .eegraw)");
    c_ft->add_option("--ann", ft_ann, "seizure annotations CSV");

    CLI::App* c_pred = app.add_subcommand("predict", "score sliding windows into an alarm timeline");
    add_common(c_pred, pred_a);
    c_pred->add_option("--checkpoint", pred_ckpt, "fine-tuned checkpoint");
    c_pred->add_option("--rec", pred_rec, "input recording (.edf or .eegraw)");

    CLI::App* c_eval = app.add_subcommand("evaluate", "event-match the timeline against annotations");
    add_common(c_eval, eval_a);
    c_eval->add_option("--timeline", eval_tl, "alarm timeline CSV");
    c_eval->add_option("--ann", eval_ann, "seizure annotations CSV");
    c_eval->add_option("--rec", eval_rec, "recording defining the FAR denominator");

    CLI::App* c_rep = app.add_subcommand("report", "aggregate patient directories into a CSV");
    add_common(c_rep, rep_a);
    c_rep->add_option("dirs", patient_dirs, "patient working directories")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e); // --help
        std::fprintf(stderr, "eegfc: usage error: %s\n", e.what());
        std::fprintf(stderr, "%s", app.help().c_str());
        return 1;
    }

    const char* cmd = argv[1];
    try {
        if (c_synth->parsed()) cmd_synth(synth_a, line_noise_hz, line_noise_gain);
        if (c_pre->parsed()) cmd_preprocess(pre_a, pre_rec);
        if (c_tok->parsed()) cmd_tokenize(tok_a, tok_rec);
        if (c_pt->parsed()) cmd_pretrain(pt_a, pt_tokens);
        if (c_ft->parsed()) cmd_finetune(ft_a, ft_ckpt, ft_rec, ft_ann);
        if (c_pred->parsed()) cmd_predict(pred_a, pred_ckpt, pred_rec);
        if (c_eval->parsed()) cmd_evaluate(eval_a, eval_tl, eval_ann, eval_rec);
        if (c_rep->parsed()) cmd_report(rep_a, patient_dirs);
    } catch (const Error& e) {
        std::fprintf(stderr, "eegfc: %s error: %s\n", kind_name(e.kind()), e.what());
        if (e.kind() == ErrorKind::usage)
            std::fprintf(stderr, "usage: eegfc %s --out DIR [options]; see 'eegfc %s --help'\n", cmd,
                         cmd);
        switch (e.kind()) {
            case ErrorKind::usage: return 1;
            case ErrorKind::format: return 2;
            case ErrorKind::numeric: return 3;
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "eegfc: error: %s\n", e.what());
        return 3;
    }
    return 0;
}
