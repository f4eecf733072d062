#include <cmath>
#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

#include <unistd.h>

#include "doctest.h"
#include "cosine/cosine.h"

namespace fs = std::filesystem;

namespace {

struct Scratch {
  fs::path dir = fs::temp_directory_path() / ("cosine-capi-" + std::to_string(::getpid()));
  Scratch() { fs::create_directories(dir); }
  ~Scratch() {
    std::error_code ec;
    fs::remove_all(dir, ec);
  }
  std::string operator/(const char* name) const { return (dir / name).string(); }
};

// Two 6-cliques joined by one bridge.
cosine_graph* barbell() {
  std::vector<uint32_t> src, dst;
  for (uint32_t c = 0; c < 2; ++c)
    for (uint32_t i = 0; i < 6; ++i)
      for (uint32_t j = i + 1; j < 6; ++j) {
        src.push_back(6 * c + i);
        dst.push_back(6 * c + j);
      }
  src.push_back(5);
  dst.push_back(6);
  cosine_graph* g = nullptr;
  REQUIRE(cosine_graph_create(12, src.data(), dst.data(), nullptr, src.size(), 0, &g) == COSINE_OK);
  return g;
}

void collect(const char* message, void* user) { static_cast<std::vector<std::string>*>(user)->push_back(message); }

}  // namespace

TEST_CASE("graph handles and error reporting") {
  CHECK(std::strlen(cosine_version()) > 0);
  cosine_graph* g = barbell();
  CHECK(cosine_graph_node_count(g) == 12);
  CHECK(cosine_graph_arc_count(g) == 62);
  cosine_graph_free(g);
  cosine_graph_free(nullptr);

  cosine_graph* missing = nullptr;
  CHECK(cosine_graph_load("/nonexistent/x.edges", 0, &missing) == COSINE_ERR_IO);
  CHECK(missing == nullptr);
  CHECK(std::string(cosine_last_error()).find("/nonexistent/x.edges") != std::string::npos);

  CHECK(cosine_graph_load(nullptr, 0, &missing) == COSINE_ERR_INVALID_ARGUMENT);

  Scratch tmp;
  {
    FILE* f = std::fopen((tmp / "bad.edges").c_str(), "w");
    std::fputs("0 1\n1 x\n", f);
    std::fclose(f);
  }
  CHECK(cosine_graph_load((tmp / "bad.edges").c_str(), 0, &missing) == COSINE_ERR_PARSE);
  CHECK(std::string(cosine_last_error()).find("line 2") != std::string::npos);

  const uint32_t src[] = {0}, dst[] = {7};
  CHECK(cosine_graph_create(3, src, dst, nullptr, 1, 0, &missing) != COSINE_OK);
}

TEST_CASE("full workflow through the C API") {
  Scratch tmp;
  cosine_graph* g = barbell();
  cosine_split* split = nullptr;
  REQUIRE(cosine_split_create(g, 0.1, 3, &split) == COSINE_OK);
  CHECK(cosine_split_test_count(split) == 3);
  const cosine_graph* train = cosine_split_train_graph(split);
  CHECK(cosine_graph_arc_count(train) == 56);

  cosine_partition* part = nullptr;
  REQUIRE(cosine_partition_compute(train, 4, 0.1, 25, 1, &part) == COSINE_OK);
  CHECK(cosine_partition_group_count(part) == 4);
  double cut = 0, imbalance = 0;
  REQUIRE(cosine_partition_quality(train, part, &cut, &imbalance) == COSINE_OK);
  CHECK(imbalance <= 1.1 + 1e-9);
  CHECK(cosine_partition_save(part, (tmp / "g.part").c_str()) == COSINE_OK);

  cosine_walk_options wopts;
  cosine_walk_options_default(&wopts);
  wopts.set_size = 2;
  wopts.walks_per_vertex = 30;
  cosine_groupsets* sets = nullptr;
  REQUIRE(cosine_groupsets_build(train, part, &wopts, &sets) == COSINE_OK);
  CHECK(cosine_groupsets_set_size(sets) == 2);
  uint32_t row[2];
  REQUIRE(cosine_groupsets_get(sets, 0, row) == COSINE_OK);
  CHECK(row[0] == cosine_partition_group_of(part, 0));
  CHECK(row[0] != row[1]);
  CHECK(cosine_groupsets_get(sets, 99, row) == COSINE_ERR_OUT_OF_RANGE);

  cosine_model* model = nullptr;
  REQUIRE(cosine_model_create(sets, 4, 5, &model) == COSINE_OK);
  CHECK(cosine_model_parameter_count(model) == 2 * 4 * 4 + 12 * 2);

  cosine_train_options topts;
  cosine_train_options_default(&topts);
  topts.epochs = 50;
  topts.trace_interval = 500;
  std::vector<double> losses;
  topts.trace = [](uint64_t, double loss, void* user) { static_cast<std::vector<double>*>(user)->push_back(loss); };
  topts.trace_user = &losses;
  uint64_t pairs = 0;
  double mean_loss = 0;
  REQUIRE(cosine_model_train(model, train, sets, &topts, &pairs, &mean_loss) == COSINE_OK);
  CHECK(pairs == 50 * 56);
  CHECK(std::isfinite(mean_loss));
  CHECK(losses.size() >= 5);

  REQUIRE(cosine_model_save(model, (tmp / "m.ckpt").c_str()) == COSINE_OK);
  cosine_model* reloaded = nullptr;
  REQUIRE(cosine_model_load((tmp / "m.ckpt").c_str(), &reloaded) == COSINE_OK);
  CHECK(cosine_model_parameter_count(reloaded) == cosine_model_parameter_count(model));

  cosine_embeddings* emb = nullptr;
  REQUIRE(cosine_embeddings_export(model, sets, &emb) == COSINE_OK);
  CHECK(cosine_embeddings_rows(emb) == 12);
  CHECK(cosine_embeddings_dim(emb) == 4);
  CHECK(cosine_embeddings_row(emb, 11) != nullptr);
  CHECK(cosine_embeddings_row(emb, 12) == nullptr);
  double auc = 0, mrr = 0;
  REQUIRE(cosine_eval_link(split, emb, COSINE_OP_DOT, 10000, 5, 1, &auc, &mrr) == COSINE_OK);
  CHECK(auc >= 0.0);
  CHECK(auc <= 1.0);
  CHECK(mrr > 0.0);

  topts.dim = 4;
  cosine_embeddings* lookup = nullptr;
  REQUIRE(cosine_lookup_train(train, &topts, &lookup) == COSINE_OK);
  CHECK(cosine_embeddings_rows(lookup) == 12);

  topts.learning_rate = -1;
  CHECK(cosine_model_train(model, train, sets, &topts, nullptr, nullptr) == COSINE_ERR_INVALID_ARGUMENT);

  cosine_embeddings_free(lookup);
  cosine_embeddings_free(emb);
  cosine_model_free(reloaded);
  cosine_model_free(model);
  cosine_groupsets_free(sets);
  cosine_partition_free(part);
  cosine_split_free(split);
  cosine_graph_free(g);
}

TEST_CASE("budget helpers") {
  uint64_t compressed = 0, uncompressed = 0;
  double ratio = 0;
  cosine_budget(1000000, 10000, 8, 5, 100, &compressed, &uncompressed, &ratio);
  CHECK(compressed == 5160000);
  CHECK(uncompressed == 200000000);
  CHECK(ratio == doctest::Approx(0.0258));
  CHECK(cosine_default_group_count(1000, 5, 8, 100) == 50);
}

TEST_CASE("warning handler") {
  std::vector<std::string> seen;
  cosine_set_warning_handler(collect, &seen);
  cosine_groupsets* sets = nullptr;
  cosine_graph* g = barbell();
  cosine_partition* part = nullptr;
  REQUIRE(cosine_partition_compute(g, 12, 0.0, 5, 1, &part) == COSINE_OK);
  cosine_walk_options wopts;
  cosine_walk_options_default(&wopts);
  wopts.set_size = 5;
  REQUIRE(cosine_groupsets_build(g, part, &wopts, &sets) == COSINE_OK);
  cosine_model* model = nullptr;
  REQUIRE(cosine_model_create(sets, 100, 1, &model) == COSINE_OK);
  cosine_set_warning_handler(nullptr, nullptr);
  CHECK_FALSE(seen.empty());
  cosine_model_free(model);
  cosine_groupsets_free(sets);
  cosine_partition_free(part);
  cosine_graph_free(g);
}

TEST_CASE("pipeline run") {
  Scratch tmp;
  const std::string missing = R"({"input": "/nonexistent/g.edges", "output_dir": ")" + (tmp / "run") + "\"}";
  char* report = nullptr;
  CHECK(cosine_pipeline_run(missing.c_str(), &report) == COSINE_ERR_STEP);
  CHECK(report == nullptr);
  CHECK(std::string(cosine_last_error()).rfind("load: ", 0) == 0);
  CHECK(cosine_pipeline_run("{\"bogus\": 1}", nullptr) == COSINE_ERR_INVALID_ARGUMENT);
  CHECK(cosine_pipeline_run("{", nullptr) == COSINE_ERR_PARSE);

  cosine_graph* g = barbell();
  REQUIRE(cosine_graph_save(g, (tmp / "g.edges").c_str()) == COSINE_OK);
  cosine_graph_free(g);
  const std::string cfg = R"({"input": ")" + (tmp / "g.edges") + R"(", "output_dir": ")" + (tmp / "run") +
                          R"(", "groups": 4, "set_size": 2, "epochs": 5})";
  REQUIRE(cosine_pipeline_run(cfg.c_str(), &report) == COSINE_OK);
  REQUIRE(report != nullptr);
  CHECK(std::string(report).find("\"step\":\"eval-lp\"") != std::string::npos);
  cosine_string_free(report);
  CHECK(fs::exists(tmp / "run/emb.txt"));
}
