// Copyright 2026 The noteprobe Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "noteprobe/inference.hpp"

#include <gtest/gtest.h>

#include "noteprobe/error.hpp"
#include "support/stub_server.hpp"

namespace noteprobe {
namespace {

using testing::StubOptions;
using testing::StubServer;

GroupedDataset make_dataset(std::size_t groups, std::size_t samples) {
  GroupedDataset ds;
  ds.characteristic = "synthetic";
  for (std::size_t g = groups; g-- > 0;) {
    GroupedDataset::Group group{"g" + std::to_string(g), {}};
    for (std::size_t i = 0; i < samples; ++i) {
      const std::string id = "n" + std::to_string(100 + i);
      group.samples.push_back(
          {id, std::string(3 + (i * 7 + g * 13) % 120, 'x') + id, AlterOp::change});
    }
    ds.groups.push_back(std::move(group));
  }
  return ds;
}

ModelEndpoint endpoint_for(const StubServer& server) {
  ModelEndpoint e;
  e.base_url = server.url();
  e.timeout_ms = 5000;
  e.max_batch = 4;
  e.max_parallel = 4;
  e.retries = 3;
  e.retry_backoff_ms = 1;
  return e;
}

void expect_matches_stub(const GroupedDataset& ds, const std::vector<PredictionRecord>& records,
                         const std::vector<std::string>& labels) {
  std::size_t n = 0;
  for (const auto& g : ds.groups) n += g.samples.size();
  ASSERT_EQ(records.size(), n);
  for (std::size_t i = 1; i < records.size(); ++i) {
    EXPECT_LT(std::tie(records[i - 1].group, records[i - 1].sample_id),
              std::tie(records[i].group, records[i].sample_id));
  }
  for (const auto& r : records) {
    const auto& group = *std::find_if(ds.groups.begin(), ds.groups.end(),
                                      [&](const auto& g) { return g.name == r.group; });
    const auto& sample = *std::find_if(group.samples.begin(), group.samples.end(),
                                       [&](const auto& s) { return s.id == r.sample_id; });
    for (std::size_t k = 0; k < labels.size(); ++k) {
      EXPECT_EQ(r.probabilities.at(labels[k]), StubServer::expected_probability(sample.text, k));
    }
  }
}

TEST(FetchModelInfo, ParsesInfo) {
  StubServer server({.model_id = "m1", .task = "binary"});
  const auto info = fetch_model_info(endpoint_for(server));
  EXPECT_EQ(info.model_id, "m1");
  EXPECT_EQ(info.task, "binary");
  EXPECT_EQ(info.labels, std::vector<std::string>{"mortality"});
}

TEST(PredictRemote, TwoGroupsThreeSamplesOrdered) {
  StubServer server;
  const auto ds = make_dataset(2, 3);
  const auto records = predict_remote(ds, endpoint_for(server));
  ASSERT_EQ(records.size(), 6u);
  EXPECT_EQ(records[0].group, "g0");
  EXPECT_EQ(records[0].sample_id, "n100");
  EXPECT_EQ(records[5].group, "g1");
  EXPECT_EQ(records[5].sample_id, "n102");
  expect_matches_stub(ds, records, {"mortality"});
}

TEST(PredictRemote, EchoOracleWithManyLabels) {
  StubServer server({.labels = {"mortality", "Essential hypertension", "Acute kidney failure"}});
  const auto ds = make_dataset(5, 37);
  expect_matches_stub(ds, predict_remote(ds, endpoint_for(server)),
                      {"mortality", "Essential hypertension", "Acute kidney failure"});
}

TEST(PredictRemote, RespectsBatchAndParallelLimits) {
  StubServer server({.max_delay_ms = 15});
  auto endpoint = endpoint_for(server);
  endpoint.max_batch = 5;
  endpoint.max_parallel = 3;
  const auto ds = make_dataset(4, 30);
  predict_remote(ds, endpoint);
  EXPECT_EQ(server.predict_calls(), 24);
  EXPECT_LE(server.max_in_flight(), 3);
  EXPECT_EQ(server.largest_batch(), 5u);
}

TEST(PredictRemote, CompletionOrderDoesNotMatter) {
  const auto ds = make_dataset(3, 40);
  StubServer plain;
  auto sequential = endpoint_for(plain);
  sequential.max_parallel = 1;
  const auto expected = predict_remote(ds, sequential);
  StubServer shuffled({.max_delay_ms = 20});
  auto parallel = endpoint_for(shuffled);
  parallel.max_parallel = 8;
  parallel.max_batch = 3;
  EXPECT_EQ(predict_remote(ds, parallel), expected);
}

TEST(PredictRemote, RetriesTransientFailures) {
  StubServer server({.transient_failures = 2});
  const auto ds = make_dataset(2, 6);
  expect_matches_stub(ds, predict_remote(ds, endpoint_for(server)), {"mortality"});
}

TEST(PredictRemote, PersistentFailureListsMissingPairs) {
  StubServer server({.always_unavailable = true});
  auto endpoint = endpoint_for(server);
  endpoint.retries = 1;
  try {
    predict_remote(make_dataset(2, 2), endpoint);
    FAIL() << "expected TransportError";
  } catch (const TransportError& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("4 predictions missing"), std::string::npos) << what;
    EXPECT_NE(what.find("(g0, n100)"), std::string::npos) << what;
    EXPECT_NE(what.find("(g1, n101)"), std::string::npos) << what;
  }
}

TEST(PredictRemote, UnreachableServerIsTransportError) {
  int port;
  {
    StubServer server;
    port = server.port();
  }
  ModelEndpoint endpoint;
  endpoint.base_url = "http://127.0.0.1:" + std::to_string(port);
  endpoint.retries = 1;
  endpoint.retry_backoff_ms = 1;
  endpoint.timeout_ms = 500;
  EXPECT_THROW(predict_remote(make_dataset(1, 1), endpoint), TransportError);
}

TEST(PredictRemote, OutOfRangeProbabilityNamesRecord) {
  StubServer server({.out_of_range_marker = "n104"});
  try {
    predict_remote(make_dataset(2, 6), endpoint_for(server));
    FAIL() << "expected ProtocolError";
  } catch (const ProtocolError& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("1.2"), std::string::npos) << what;
    EXPECT_NE(what.find("n104)"), std::string::npos) << what;
  }
}

TEST(PredictRemote, LabelMismatchIsProtocolError) {
  StubServer server({.labels = {"a", "b"}, .reorder_labels = true});
  EXPECT_THROW(predict_remote(make_dataset(1, 2), endpoint_for(server)), ProtocolError);
}

TEST(PredictRemote, RowCountMismatchIsProtocolError) {
  StubServer server({.drop_last_row = true});
  EXPECT_THROW(predict_remote(make_dataset(1, 2), endpoint_for(server)), ProtocolError);
}

TEST(PredictRemote, BearerTokenIsForwarded) {
  StubServer server({.required_token = "s3cret"});
  auto endpoint = endpoint_for(server);
  EXPECT_THROW(predict_remote(make_dataset(1, 2), endpoint), ProtocolError);
  endpoint.bearer_token = "s3cret";
  EXPECT_EQ(predict_remote(make_dataset(1, 2), endpoint).size(), 2u);
}

TEST(PredictRemote, UrlPrefixAndValidation) {
  ModelEndpoint endpoint;
  endpoint.base_url = "https://example.org";
  EXPECT_THROW(predict_remote(make_dataset(1, 1), endpoint), ValidationError);
  endpoint.base_url = "http://127.0.0.1:1";
  endpoint.max_batch = 0;
  EXPECT_THROW(predict_remote(make_dataset(1, 1), endpoint), ValidationError);
}

TEST(Conformance, StubPassesEveryCheck) {
  StubServer server({.labels = {"mortality", "Unspecified anemias"}});
  const auto report = check_conformance(endpoint_for(server));
  for (const auto& c : report.checks) EXPECT_TRUE(c.passed) << c.name << ": " << c.detail;
  EXPECT_EQ(report.checks.size(), 8u);
  EXPECT_TRUE(report.passed());
}

TEST(Conformance, DetectsViolations) {
  StubServer lax({.lax_validation = true});
  const auto report = check_conformance(endpoint_for(lax));
  EXPECT_FALSE(report.passed());
  std::vector<std::string> failed;
  for (const auto& c : report.checks)
    if (!c.passed) failed.push_back(c.name);
  EXPECT_EQ(failed, (std::vector<std::string>{"rejects_malformed_json", "rejects_missing_texts",
                                              "rejects_non_string_texts"}));

  StubServer reordered({.labels = {"a", "b"}, .reorder_labels = true});
  const auto r2 = check_conformance(endpoint_for(reordered));
  EXPECT_FALSE(r2.passed());
  EXPECT_TRUE(r2.checks[0].passed);
  EXPECT_FALSE(r2.checks[1].passed);
}

}  // namespace
}  // namespace noteprobe
