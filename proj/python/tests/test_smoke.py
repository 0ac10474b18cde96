# Copyright 2026 The noteprobe Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

import json
import math
import subprocess
import sys
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import pytest

import noteprobe as npb


MOCK = {
    "base_logits": {"mortality": -0.85, "Essential hypertension": -0.6},
    "lexicon": {"transgender": {"mortality": 0.4}},
    "case_sensitive": False,
}


@pytest.fixture(scope="module")
def corpus():
    return npb.synthetic_corpus(seed=11, n=80)


def test_synthetic_corpus_is_deterministic(corpus):
    again = npb.synthetic_corpus(seed=11, n=80)
    assert len(corpus) == 80
    assert [n.text for n in corpus.notes] == [n.text for n in again.notes]
    assert corpus.has_labels()
    assert "mortality" in corpus.label_vocabulary


def test_corpus_round_trip(tmp_path, corpus):
    path = tmp_path / "notes.jsonl"
    npb.save_corpus(corpus, path)
    assert npb.load_corpus(path).notes == corpus.notes


def test_detect_and_alter():
    gender = npb.Characteristic.builtin("gender")
    text = "72 year old woman admitted with chest pain. She was stable."
    spans = npb.detect(text, gender)
    assert npb.resolve_groups(spans) == {"female"}
    result = npb.alter(text, gender, "male")
    assert result == {"excluded": False, "text": "72 year old man admitted with chest pain. He was stable.",
                      "op": "change"}


def test_builtin_group_counts(corpus):
    counts = {name: len(npb.generate_groups(corpus, npb.Characteristic.builtin(name)).groups)
              for name in npb.builtin_characteristics()}
    assert counts == {"gender": 3, "age": 73, "ethnicity": 5}


def test_unknown_characteristic_raises():
    with pytest.raises(npb.ValidationError, match="gender"):
        npb.Characteristic.builtin("religion")


def test_mock_pipeline_deviation_sums_to_zero(corpus):
    gender = npb.Characteristic.builtin("gender")
    ds = npb.generate_groups(corpus, gender)
    model = npb.MockModel.from_json(json.dumps(MOCK))
    records = npb.predict_mock(ds, model)
    assert len(records) == 3 * ds.cohort_size
    means = npb.aggregate(records, "gender", gender.group_names)
    dev = npb.deviation(means)
    assert dev.cells.groups == ["female", "male", "transgender"]
    for column in zip(*dev.cells.values()):
        assert abs(sum(column)) < 1e-12 * 3
    assert dev.cells.at("transgender", "mortality") > 0
    assert "| transgender |" in npb.render_group_table(means, "mortality")
    assert npb.render_heatmap_svg(dev).startswith("<svg")
    assert npb.to_csv(means.means).startswith("label,female,male,transgender\n")


def test_deviation_of_plain_table():
    dev = npb.deviation_of(["female", "male", "transgender"], ["mortality"], [[0.335], [0.333], [0.326]])
    expected = [0.0055, 0.0025, -0.0080]
    for row, want in zip(dev.cells.values(), expected):
        assert row[0] == pytest.approx(want, abs=1e-12)


def test_auroc():
    assert npb.auroc([0.8, 0.4, 0.6, 0.2], [True, True, False, False]) == 0.75
    with pytest.raises(npb.ValidationError):
        npb.auroc([0.1, 0.2], [True, True])


def test_baseline_and_age_sweep(corpus):
    baseline = npb.baseline_distribution(corpus, npb.Characteristic.builtin("gender"))
    assert sum(baseline.group_counts.values()) == len(corpus)
    ages = npb.generate_groups(corpus, npb.Characteristic.builtin("age"))
    records = npb.predict_mock(ages, npb.MockModel.from_json(json.dumps(MOCK)))
    curves = npb.age_sweep(records, corpus)
    assert [c.label for c in curves] == ["Essential hypertension", "mortality"]
    assert len(curves[0].points) == 73 and curves[0].points[-1].age == "over90"
    assert "<polyline" in npb.render_age_plot_svg(curves)


def test_diverging_color():
    assert npb.diverging_color(0.0) == "#ffffff"
    assert npb.diverging_color(1.0) == "#ff0000"
    assert npb.diverging_color(-1.0) == "#0000ff"


class _Model(BaseHTTPRequestHandler):
    labels = ["mortality"]

    def log_message(self, *args):
        pass

    def _send(self, status, body):
        payload = json.dumps(body).encode()
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(payload)))
        self.end_headers()
        self.wfile.write(payload)

    def do_GET(self):
        if self.path == "/v1/info":
            self._send(200, {"model_id": "py-len", "task": "binary", "labels": self.labels})
        else:
            self._send(404, {"error": "not found"})

    def do_POST(self):
        body = self.rfile.read(int(self.headers.get("Content-Length", 0)))
        try:
            texts = json.loads(body)["texts"]
            if not isinstance(texts, list) or not texts or not all(isinstance(t, str) for t in texts):
                raise ValueError("texts must be a non-empty array of strings")
        except (ValueError, KeyError, TypeError) as e:
            self._send(400, {"error": str(e)})
            return
        probs = [[1.0 / (1.0 + math.exp(-len(t) / 100.0 + 1.0))] for t in texts]
        self._send(200, {"labels": self.labels, "probabilities": probs})


@pytest.fixture(scope="module")
def model_server():
    server = ThreadingHTTPServer(("127.0.0.1", 0), _Model)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    yield f"http://127.0.0.1:{server.server_address[1]}"
    server.shutdown()


def test_remote_prediction_and_conformance(corpus, model_server):
    info = npb.fetch_model_info(model_server)
    assert info.labels == ["mortality"]
    ds = npb.generate_groups(corpus, npb.Characteristic.builtin("gender"))
    records = npb.predict_remote(ds, model_server, max_batch=7, max_parallel=3)
    texts = {(g.name, s.id): s.text for g in ds.groups for s in g.samples}
    assert len(records) == len(texts)
    for r in records:
        want = 1.0 / (1.0 + math.exp(-len(texts[(r.group, r.sample_id)]) / 100.0 + 1.0))
        assert r.probabilities["mortality"] == pytest.approx(want, abs=1e-15)
    checks = npb.check_conformance(model_server)
    assert all(c["passed"] for c in checks), checks


def test_selftest_passes():
    passed, checks, table = npb.run_selftest(n=400)
    assert passed, table
    assert len(checks) >= 10


def test_cli_in_process(tmp_path):
    code, out, err = npb.run_cli(["dump-spec", "--characteristic", "gender"])
    assert code == 0 and json.loads(out)["name"] == "gender"
    code, _, err = npb.run_cli(["analyze", "--characteristic", "gender", "--out", str(tmp_path)])
    assert code == 2 and "generate" in err


def test_module_entry_point(tmp_path, corpus):
    npb.save_corpus(corpus, tmp_path / "notes.jsonl")
    (tmp_path / "mock.json").write_text(json.dumps(MOCK))
    done = subprocess.run(
        [sys.executable, "-m", "noteprobe", "run", "--input", str(tmp_path / "notes.jsonl"),
         "--characteristic", "ethnicity", "--mock", str(tmp_path / "mock.json"), "--out", str(tmp_path / "runs")],
        capture_output=True, text=True)
    assert done.returncode == 0, done.stderr
    assert (tmp_path / "runs" / "ethnicity" / "heatmap.svg").exists()
