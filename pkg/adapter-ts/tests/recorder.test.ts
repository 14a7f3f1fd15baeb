import { spawnSync } from "child_process";
import * as fs from "fs";
import * as os from "os";
import * as path from "path";
import { afterEach, beforeEach, describe, expect, it } from "vitest";

import {
  AdapterError,
  CliExitError,
  CliNotFoundError,
  LengthMismatchError,
  NonMonotonicEpochError,
  RunRecorder,
  UnknownLabelError,
  ValueOutOfRangeError,
} from "../src/recorder";

let workDir: string;

beforeEach(() => {
  workDir = fs.mkdtempSync(path.join(os.tmpdir(), "adapter-"));
});

afterEach(() => {
  fs.rmSync(workDir, { recursive: true, force: true });
});

function cliMetricsJson(recorder: RunRecorder): any {
  const result = spawnSync(
    "cardsmith",
    ["metrics", "--predictions", recorder.predictionLogPath, "--labels", recorder.labelMapPath, "--json"],
    { encoding: "utf-8" },
  );
  expect(result.status, result.stderr).toBe(0);
  return JSON.parse(result.stdout);
}

/** Replays the canonical toy run: 3 epochs, 12 predictions -> [[5,1],[2,4]]. */
function toyRun(recorder: RunRecorder): void {
  recorder.recordEpoch(1, 0.9, 1.0, 0.55, 0.5);
  recorder.recordEpoch(2, 0.6, 0.8, 0.7, 0.62);
  recorder.recordEpoch(3, 0.45, 0.75, 0.8, 0.67);
  // batch 1: all the class-0 ground truth
  recorder.recordPredictions([0, 0, 0, 0, 0, 0], [0, 0, 0, 0, 0, 1]);
  // batch 2: all the class-1 ground truth
  recorder.recordPredictions([1, 1, 1, 1, 1, 1], [0, 0, 1, 1, 1, 1]);
  recorder.flush();
}

describe("RunRecorder round trip", () => {
  it("reproduces the confusion matrix and accuracy through the CLI", () => {
    const recorder = new RunRecorder(workDir, ["Normal", "Abnormal"]);
    toyRun(recorder);
    const doc = cliMetricsJson(recorder);
    expect(doc.confusion_matrix).toEqual([
      [5, 1],
      [2, 4],
    ]);
    expect(doc.accuracy).toBe(0.75);
    expect(doc.n).toBe(12);
  });

  it("writes an epoch log the ingest layer accepts", () => {
    const recorder = new RunRecorder(workDir, ["Normal", "Abnormal"]);
    toyRun(recorder);
    const history = fs.readFileSync(recorder.epochLogPath, "utf-8");
    expect(history.startsWith("epoch,train_loss,val_loss,train_acc,val_acc\n")).toBe(true);
    expect(history.trim().split("\n")).toHaveLength(4);
  });

  it("preserves argmax consistency for scored predictions", () => {
    const recorder = new RunRecorder(workDir, ["Normal", "Abnormal"]);
    const scores: number[][] = [
      [0.7000000000000001, 0.2999999999999999],
      [0.5000000001, 0.4999999999],
      [0.1, 0.9],
    ];
    recorder.recordPredictions([0, 0, 1], [0, 0, 1], scores);
    recorder.flush();
    const doc = cliMetricsJson(recorder); // would exit 1 on any argmax drift
    expect(doc.accuracy).toBe(1.0);
  });

  it("flush is repeatable without duplicating rows", () => {
    const recorder = new RunRecorder(workDir, ["Normal", "Abnormal"]);
    toyRun(recorder);
    recorder.flush();
    const doc = cliMetricsJson(recorder);
    expect(doc.n).toBe(12);
  });
});

describe("RunRecorder validation", () => {
  it("rejects non-increasing epochs", () => {
    const recorder = new RunRecorder(workDir, ["a", "b"]);
    recorder.recordEpoch(2, 0.5, 0.5, 0.5, 0.5);
    expect(() => recorder.recordEpoch(2, 0.4, 0.4, 0.6, 0.6)).toThrow(NonMonotonicEpochError);
    expect(() => recorder.recordEpoch(1, 0.4, 0.4, 0.6, 0.6)).toThrow(NonMonotonicEpochError);
  });

  it("rejects out-of-range statistics before anything is written", () => {
    const recorder = new RunRecorder(workDir, ["a", "b"]);
    expect(() => recorder.recordEpoch(1, 0.5, 0.5, 1.2, 0.5)).toThrow(ValueOutOfRangeError);
    expect(() => recorder.recordEpoch(1, -0.5, 0.5, 0.5, 0.5)).toThrow(ValueOutOfRangeError);
    expect(fs.existsSync(recorder.epochLogPath)).toBe(false);
  });

  it("empty prediction batch is a no-op", () => {
    const recorder = new RunRecorder(workDir, ["a", "b"]);
    expect(() => recorder.recordPredictions([], [])).not.toThrow();
  });

  it("rejects mismatched lengths", () => {
    const recorder = new RunRecorder(workDir, ["a", "b"]);
    expect(() => recorder.recordPredictions([0, 1], [0])).toThrow(LengthMismatchError);
    expect(() => recorder.recordPredictions([0], [0], [[0.5, 0.5], [0.5, 0.5]])).toThrow(
      LengthMismatchError,
    );
    expect(() => recorder.recordPredictions([0], [0], [[0.5, 0.5, 0.0]])).toThrow(LengthMismatchError);
  });

  it("rejects labels outside the map", () => {
    const recorder = new RunRecorder(workDir, ["a", "b"]);
    expect(() => recorder.recordPredictions([2], [0])).toThrow(UnknownLabelError);
    expect(() => recorder.recordPredictions([0], [-1])).toThrow(UnknownLabelError);
  });

  it("rejects mixing scored and unscored batches", () => {
    const recorder = new RunRecorder(workDir, ["a", "b"]);
    recorder.recordPredictions([0], [0]);
    expect(() => recorder.recordPredictions([1], [1], [[0.2, 0.8]])).toThrow(AdapterError);
  });
});

const CONFIG = `overview: Toy abnormal/normal classifier for the adapter round trip.
dataset:
  name: Toy EEG
  num_classes: 2
  ground_truth: [Normal, Abnormal]
  split: "80:20"
  preprocessing: [Normalization]
model:
  input_desc: toy features
  output_desc: binary label
  model_type: toy
  learning_rate: 0.001
  batch_size: 4
  parameter_count: 1k
assets:
  prediction_log: predictions.csv
  epoch_log: history.csv
uncertainty: {level: 0.95, replicates: 200, seed: 7}
`;

describe("finalize", () => {
  it("produces a model card via the CLI", () => {
    const recorder = new RunRecorder(workDir, ["Normal", "Abnormal"]);
    toyRun(recorder);
    const configPath = path.join(workDir, "config.yaml");
    fs.writeFileSync(configPath, CONFIG, "utf-8");
    const stdout = recorder.finalize(configPath, "1.0");
    const cardPath = path.join(workDir, "model_card.html");
    expect(fs.existsSync(cardPath)).toBe(true);
    expect(stdout).toContain(cardPath);
    const html = fs.readFileSync(cardPath, "utf-8");
    expect(html).toContain("<h2>Performance</h2>");
    expect(html).toContain("Toy EEG");
  });

  it("propagates a nonzero exit for an invalid config", () => {
    const recorder = new RunRecorder(workDir, ["Normal", "Abnormal"]);
    toyRun(recorder);
    const configPath = path.join(workDir, "bad.yaml");
    fs.writeFileSync(configPath, "overview: broken\n", "utf-8");
    expect(() => recorder.finalize(configPath, "1.0")).toThrowError(CliExitError);
    try {
      recorder.finalize(configPath, "1.0");
    } catch (err) {
      expect((err as CliExitError).exitCode).toBe(1);
    }
  });

  it("reports a missing CLI binary", () => {
    const recorder = new RunRecorder(workDir, ["Normal", "Abnormal"], {
      cliBinary: "definitely-not-on-path",
    });
    toyRun(recorder);
    const configPath = path.join(workDir, "config.yaml");
    fs.writeFileSync(configPath, CONFIG, "utf-8");
    expect(() => recorder.finalize(configPath, "1.0")).toThrow(CliNotFoundError);
  });
});
