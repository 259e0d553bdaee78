#include "eegfc/config.hpp"

#include "eegfc/error.hpp"

#include <doctest.h>

using namespace eegfc;

TEST_SUITE_BEGIN("config");

TEST_CASE("defaults carry the pipeline parameter set") {
    const ConfigSet cfg = ConfigSet::defaults();
    CHECK(cfg.get_int("levels") == 512);
    CHECK(cfg.get_int("d_model") == 128);
    CHECK(cfg.get_int("n_layers") == 4);
    CHECK(cfg.get_int("n_heads") == 4);
    CHECK(cfg.get_int("block_size") == 512);
    CHECK(cfg.get_int("frame_len") == 15);
    CHECK(cfg.get_int("batch_size") == 16);
    CHECK(cfg.get_int("accum_pretrain") == 8);
    CHECK(cfg.get_int("accum_finetune") == 4);
    CHECK(cfg.get_int("pretrain_steps") == 5000);
    CHECK(cfg.get_int("finetune_steps") == 5000);
    CHECK(cfg.get_int("eval_every") == 100);
    CHECK(cfg.get_double("lr_pretrain") == doctest::Approx(3e-4));
    CHECK(cfg.get_double("lr_finetune") == doctest::Approx(3e-5));
    CHECK(cfg.get_double("lambda_mse") == doctest::Approx(0.1));
    CHECK(cfg.get_double("dropout_pretrain") == doctest::Approx(0.1));
    CHECK(cfg.get_double("dropout_finetune") == doctest::Approx(0.2));
    CHECK(cfg.get_double("weight_decay") == doctest::Approx(0.01));
    CHECK(cfg.get_double("seg_dur_s") == doctest::Approx(30.0));
    CHECK(cfg.get_double("train_overlap") == doctest::Approx(0.5));
    CHECK(cfg.get_double("infer_overlap") == doctest::Approx(0.75));
    CHECK(cfg.get_double("threshold") == doctest::Approx(0.5));
    CHECK(cfg.get_double("horizon_s") == doctest::Approx(30.0));
    CHECK(cfg.get_double("clip_sigma") == doctest::Approx(5.0));
    CHECK(cfg.get_bool("backbone_frozen") == false);
}

TEST_CASE("file values override defaults; flags override files") {
    ConfigSet cfg = ConfigSet::defaults();
    cfg.apply_file_text("# comment line\n\nbatch_size = 8\nlr_finetune = 1e-4\n", "test.cfg");
    CHECK(cfg.get_int("batch_size") == 8);
    CHECK(cfg.get_double("lr_finetune") == doctest::Approx(1e-4));
    cfg.set("batch_size", "4", ConfigSource::flag);
    CHECK(cfg.get_int("batch_size") == 4);

    int n_flag = 0, n_file = 0;
    for (const auto& e : cfg.entries()) {
        if (e.source == ConfigSource::flag) ++n_flag;
        if (e.source == ConfigSource::file) ++n_file;
    }
    CHECK(n_flag == 1);
    CHECK(n_file == 1); // batch_size was promoted to flag provenance
}

TEST_CASE("unknown keys are rejected with location info") {
    ConfigSet cfg = ConfigSet::defaults();
    CHECK_THROWS_AS(cfg.set("no_such_key", "1", ConfigSource::flag), Error);
    try {
        cfg.apply_file_text("levels = 512\nbogus_key = 3\n", "bad.cfg");
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::usage);
        CHECK(std::string(e.what()).find("bad.cfg") != std::string::npos);
        CHECK(std::string(e.what()).find("2") != std::string::npos); // line number
    }
}

TEST_CASE("malformed numbers raise usage errors") {
    ConfigSet cfg = ConfigSet::defaults();
    cfg.set("batch_size", "not_a_number", ConfigSource::flag);
    CHECK_THROWS_AS(cfg.get_int("batch_size"), Error);
    cfg.set("lr_pretrain", "1e", ConfigSource::flag);
    CHECK_THROWS_AS(cfg.get_double("lr_pretrain"), Error);
}

TEST_CASE("effective rendering reports provenance") {
    ConfigSet cfg = ConfigSet::defaults();
    cfg.apply_file_text("batch_size = 8\n", "x.cfg");
    cfg.set("seed", "42", ConfigSource::flag);
    const std::string text = cfg.render_effective();
    CHECK(text.find("batch_size = 8  # file") != std::string::npos);
    CHECK(text.find("seed = 42  # flag") != std::string::npos);
    CHECK(text.find("levels = 512  # default") != std::string::npos);
    // sorted by key, one line per entry
    size_t lines = 0;
    for (char c : text)
        if (c == '\n') ++lines;
    CHECK(lines == cfg.entries().size());
}

TEST_SUITE_END();
