#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "promptsweep/error.hpp"
#include "promptsweep/task_model.hpp"
#include "support.hpp"

using namespace promptsweep;
using testing_support::fixture;
using testing_support::ScratchDir;
using testing_support::write_text;

namespace {

const std::vector<std::size_t> kBillsBatches{1, 10, 100, 500, 1000};
const std::vector<std::size_t> kSurveyBatches{1, 10, 100, 300};
const std::vector<ModelRef> kOneModel{{ProviderKind::mock_echo, "m"}};

} // namespace

TEST(Notation, IsABijectionOverTheEightTriples) {
    std::set<std::string> seen;
    for (const auto& f : all_flag_triples()) {
        const auto s = to_notation(f);
        EXPECT_EQ(parse_notation(s), f);
        seen.insert(s);
    }
    EXPECT_EQ(seen.size(), 8u);
    EXPECT_EQ(to_notation(Flags{true, false, true}), "(+,-,+)");
    EXPECT_EQ(parse_notation("(−,+,−)"), (Flags{false, true, false}));  // typographic minus
    EXPECT_THROW(parse_notation("(+,+)"), InvariantViolation);
    EXPECT_EQ(parse_notation("( +, -, + )"), (Flags{true, false, true}));
}

TEST(Notation, ReportingOrderFollowsComponentCount) {
    std::vector<std::string> order;
    for (const auto& f : all_flag_triples()) order.push_back(to_notation(f));
    EXPECT_EQ(order, (std::vector<std::string>{"(-,-,-)", "(-,-,+)", "(-,+,-)", "(+,-,-)",
                                               "(-,+,+)", "(+,-,+)", "(+,+,-)", "(+,+,+)"}));
}

TEST(Grid, BillsAndSurveyShapes) {
    EXPECT_EQ(generate_config_grid(kBillsBatches, kOneModel, 1).size(), 40u);
    EXPECT_EQ(generate_config_grid(kSurveyBatches, kOneModel, 1).size(), 32u);
    EXPECT_EQ(generate_config_grid(kBillsBatches, kOneModel, 3).size(), 120u);
}

TEST(Grid, CountIsProductOfAxesWithoutDuplicates) {
    std::vector<ModelRef> models{{ProviderKind::mock_echo, "a"}, {ProviderKind::mock_confusion, "b"}};
    for (int repeats = 1; repeats <= 3; ++repeats) {
        auto grid = generate_config_grid(kSurveyBatches, models, repeats, 0.0);
        EXPECT_EQ(grid.size(), 8u * kSurveyBatches.size() * models.size() * repeats);
        std::set<std::string> hashes;
        for (const auto& c : grid) hashes.insert(c.config_hash());
        EXPECT_EQ(hashes.size(), grid.size());
        EXPECT_TRUE(std::is_sorted(grid.begin(), grid.end(), grid_order_less));
    }
}

TEST(Grid, RejectsEmptyAxesAndBadRepeats) {
    EXPECT_THROW(generate_config_grid({}, kOneModel, 1), EmptyAxis);
    EXPECT_THROW(generate_config_grid({1, 0}, kOneModel, 1), EmptyAxis);
    EXPECT_THROW(generate_config_grid(kBillsBatches, {}, 1), EmptyAxis);
    EXPECT_THROW(generate_config_grid(std::vector<Flags>{}, {1}, kOneModel, 1), EmptyAxis);
    EXPECT_THROW(generate_config_grid(kBillsBatches, kOneModel, 0), InvariantViolation);
}

TEST(Grid, RepeatsCarryTrialIndices) {
    auto grid = generate_config_grid({1}, kOneModel, 3);
    std::set<int> trials;
    for (const auto& c : grid) trials.insert(c.trial_index);
    EXPECT_EQ(trials, (std::set<int>{0, 1, 2}));
}

TEST(Config, HashIsStableAndSensitiveToEveryField) {
    PromptConfig base{Flags{true, false, true}, 10, ProviderKind::openai_compat, "gpt-4o", 0.0, 0};
    EXPECT_EQ(base.canonical_string(), "(+,-,+)|10|openai_compat|gpt-4o|0|0");
    EXPECT_EQ(base.config_hash().size(), 16u);
    std::set<std::string> hashes{base.config_hash()};
    auto v = base; v.flags.nudges = true; hashes.insert(v.config_hash());
    v = base; v.batch_size = 11; hashes.insert(v.config_hash());
    v = base; v.provider = ProviderKind::gemini_compat; hashes.insert(v.config_hash());
    v = base; v.model_id = "gpt-4o-mini"; hashes.insert(v.config_hash());
    v = base; v.temperature = 0.5; hashes.insert(v.config_hash());
    v = base; v.trial_index = 1; hashes.insert(v.config_hash());
    EXPECT_EQ(hashes.size(), 7u);
}

TEST(Partition, RemainderRule) {
    auto ds = testing_support::cyclic_dataset(11, 3);
    auto batches = partition_batches(ds, 10);
    ASSERT_EQ(batches.size(), 2u);
    EXPECT_EQ(batches[0].items.size(), 10u);
    EXPECT_EQ(batches[1].items.size(), 1u);
    EXPECT_EQ(batches[1].index, 1u);

    EXPECT_EQ(partition_batches(testing_support::cyclic_dataset(10, 2), 10).size(), 1u);
    auto singles = partition_batches(testing_support::cyclic_dataset(7, 2), 1);
    ASSERT_EQ(singles.size(), 7u);
    for (std::size_t i = 0; i < 7; ++i) EXPECT_EQ(singles[i].items[0].item_id, "item" + std::to_string(i));
}

TEST(Partition, ConcatenationReproducesDataset) {
    auto ds = testing_support::cyclic_dataset(97, 4);
    for (std::size_t b = 1; b <= 110; ++b) {
        Dataset joined;
        for (const auto& batch : partition_batches(ds, b)) {
            ASSERT_GE(batch.items.size(), 1u);
            ASSERT_LE(batch.items.size(), b);
            joined.insert(joined.end(), batch.items.begin(), batch.items.end());
        }
        ASSERT_EQ(joined, ds) << "B=" << b;
    }
}

TEST(Partition, SeededShuffleIsAReproduciblePermutation) {
    auto ds = testing_support::cyclic_dataset(50, 5);
    auto a = partition_batches(ds, 7, 42);
    auto b = partition_batches(ds, 7, 42);
    Dataset ja, jb;
    for (const auto& x : a) ja.insert(ja.end(), x.items.begin(), x.items.end());
    for (const auto& x : b) jb.insert(jb.end(), x.items.begin(), x.items.end());
    EXPECT_EQ(ja, jb);
    EXPECT_NE(ja, ds);
    auto sorted_a = ja;
    auto by_id = [](const DatasetRecord& l, const DatasetRecord& r) { return l.item_id < r.item_id; };
    std::sort(sorted_a.begin(), sorted_a.end(), by_id);
    auto sorted_ds = ds;
    std::sort(sorted_ds.begin(), sorted_ds.end(), by_id);
    EXPECT_EQ(sorted_a, sorted_ds);
}

TEST(TaskSpec, LoadsFixtures) {
    auto bills = load_task_spec(fixture("bills/task.json"));
    EXPECT_EQ(bills.labels.size(), 5u);
    EXPECT_TRUE(bills.descriptions && bills.nudges && bills.few_shot);
    EXPECT_EQ(load_dataset(bills).size(), 20u);

    auto mip = load_task_spec(fixture("mip/task.json"));
    EXPECT_EQ(mip.labels, (std::vector<Label>{"neutral", "emotional"}));
    auto items = load_dataset(mip);
    EXPECT_EQ(items[6].text, "climate change\nand pollution");
}

TEST(TaskSpec, OptionalComponentsMayBeAbsent) {
    ScratchDir dir("spec");
    write_text(dir / "items.csv", "item_id,text,gold\n1,a,X\n");
    write_text(dir / "t.json", R"({"task_id":"t","instruction_header":"h","dataset":"items.csv","labels":["X","Y"]})");
    auto spec = load_task_spec(dir / "t.json");
    EXPECT_FALSE(spec.few_shot);
    EXPECT_FALSE(spec.descriptions);
    EXPECT_FALSE(spec.nudges);
}

TEST(TaskSpec, Errors) {
    ScratchDir dir("spec_err");
    write_text(dir / "items.csv", "item_id,text,gold\n1,a,X\n");
    write_text(dir / "syntax.json", "{not json");
    EXPECT_THROW(load_task_spec(dir / "syntax.json"), MalformedSpec);

    write_text(dir / "unknown_desc.json",
               R"({"task_id":"t","instruction_header":"h","dataset":"items.csv","labels":["X"],"descriptions":{"X":"x","Z":"z"}})");
    EXPECT_THROW(load_task_spec(dir / "unknown_desc.json"), InvariantViolation);

    write_text(dir / "missing_desc.json",
               R"({"task_id":"t","instruction_header":"h","dataset":"items.csv","labels":["X","Y"],"descriptions":{"X":"x"}})");
    EXPECT_THROW(load_task_spec(dir / "missing_desc.json"), InvariantViolation);

    write_text(dir / "dup.json",
               R"({"task_id":"t","instruction_header":"h","dataset":"items.csv","labels":["X","x."]})");
    EXPECT_THROW(load_task_spec(dir / "dup.json"), InvariantViolation);

    write_text(dir / "nodata.json",
               R"({"task_id":"t","instruction_header":"h","dataset":"absent.csv","labels":["X"]})");
    EXPECT_THROW(load_task_spec(dir / "nodata.json"), MissingDataset);

    write_text(dir / "overlap.json",
               R"({"task_id":"t","instruction_header":"h","dataset":"items.csv","labels":["X"],"few_shot":{"X":["A."]}})");
    EXPECT_THROW(load_task_spec(dir / "overlap.json"), InvariantViolation);
}

TEST(Dataset, ValidatesRows) {
    TaskSpec spec;
    spec.labels = {"Health", "Civil Rights"};
    auto ds = parse_dataset_csv("item_id,text,gold\r\na,t1, health \r\nb,\"t, 2\",civil rights\r\n", spec);
    ASSERT_EQ(ds.size(), 2u);
    EXPECT_EQ(ds[0].gold, "Health");
    EXPECT_EQ(ds[1].gold, "Civil Rights");
    EXPECT_EQ(ds[1].text, "t, 2");

    EXPECT_THROW(parse_dataset_csv("id,text,gold\n", spec), MalformedSpec);
    EXPECT_THROW(parse_dataset_csv("item_id,text,gold\na,t,Defense\n", spec), InvariantViolation);
    EXPECT_THROW(parse_dataset_csv("item_id,text,gold\na,t,Health\na,u,Health\n", spec), InvariantViolation);
    EXPECT_THROW(parse_dataset_csv("item_id,text,gold\na,t\n", spec), MalformedSpec);
}
