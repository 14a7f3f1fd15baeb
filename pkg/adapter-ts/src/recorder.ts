import { spawnSync } from "child_process";
import * as fs from "fs";
import * as path from "path";

export class AdapterError extends Error {}
export class NonMonotonicEpochError extends AdapterError {}
export class LengthMismatchError extends AdapterError {}
export class UnknownLabelError extends AdapterError {}
export class ValueOutOfRangeError extends AdapterError {}
export class CliNotFoundError extends AdapterError {}

export class CliExitError extends AdapterError {
  constructor(
    public readonly exitCode: number,
    stderr: string,
  ) {
    super(`cardsmith exited with code ${exitCode}: ${stderr.trim()}`);
  }
}

interface EpochRow {
  epoch: number;
  trainLoss: number;
  valLoss: number;
  trainAcc: number;
  valAcc: number;
}

interface PredictionRow {
  trueLabel: number;
  predictedLabel: number;
  scores?: number[];
}

export interface RecorderOptions {
  /** CLI binary to invoke on finalize; override for tests. */
  cliBinary?: string;
}

/**
 * Buffers per-epoch statistics and test-set predictions from a training
 * loop, then writes them in the exact CSV formats the cardsmith ingest
 * layer parses (predictions.csv, history.csv, plus labels.yaml for the
 * standalone metrics command). No metric is computed here; the Python
 * pipeline is the single source of truth.
 */
export class RunRecorder {
  private readonly epochs: EpochRow[] = [];
  private readonly predictions: PredictionRow[] = [];
  private scored: boolean | null = null;
  private readonly cliBinary: string;

  constructor(
    public readonly outputDir: string,
    public readonly labelNames: readonly string[],
    options: RecorderOptions = {},
  ) {
    if (labelNames.length < 2) {
      throw new AdapterError(`need at least 2 class names, got ${labelNames.length}`);
    }
    if (new Set(labelNames).size !== labelNames.length) {
      throw new AdapterError("class names must be unique");
    }
    this.cliBinary = options.cliBinary ?? "cardsmith";
  }

  recordEpoch(epoch: number, trainLoss: number, valLoss: number, trainAcc: number, valAcc: number): void {
    const last = this.epochs.at(-1);
    if (!Number.isInteger(epoch) || epoch < 1) {
      throw new ValueOutOfRangeError(`epoch must be a positive integer, got ${epoch}`);
    }
    if (last !== undefined && epoch <= last.epoch) {
      throw new NonMonotonicEpochError(`epoch ${epoch} not greater than last recorded ${last.epoch}`);
    }
    if (trainLoss < 0 || valLoss < 0) {
      throw new ValueOutOfRangeError("losses must be non-negative");
    }
    for (const acc of [trainAcc, valAcc]) {
      if (acc < 0 || acc > 1) {
        throw new ValueOutOfRangeError(`accuracy ${acc} outside [0, 1]`);
      }
    }
    this.epochs.push({ epoch, trainLoss, valLoss, trainAcc, valAcc });
  }

  recordPredictions(trueLabels: readonly number[], predictedLabels: readonly number[], scores?: readonly number[][]): void {
    if (trueLabels.length !== predictedLabels.length) {
      throw new LengthMismatchError(
        `${trueLabels.length} true labels vs ${predictedLabels.length} predicted labels`,
      );
    }
    if (scores !== undefined && scores.length !== trueLabels.length) {
      throw new LengthMismatchError(`${scores.length} score rows vs ${trueLabels.length} labels`);
    }
    if (trueLabels.length === 0) {
      return; // explicit no-op
    }
    const k = this.labelNames.length;
    const withScores = scores !== undefined;
    if (this.scored !== null && this.scored !== withScores) {
      throw new AdapterError("cannot mix scored and unscored prediction batches");
    }
    for (let i = 0; i < trueLabels.length; i++) {
      for (const label of [trueLabels[i], predictedLabels[i]]) {
        if (!Number.isInteger(label) || label < 0 || label >= k) {
          throw new UnknownLabelError(`label ${label} outside [0, ${k})`);
        }
      }
      if (withScores && scores![i].length !== k) {
        throw new LengthMismatchError(`score row ${i} has ${scores![i].length} entries, expected ${k}`);
      }
    }
    this.scored = withScores;
    for (let i = 0; i < trueLabels.length; i++) {
      this.predictions.push({
        trueLabel: trueLabels[i],
        predictedLabel: predictedLabels[i],
        // String(number) is shortest-round-trip, so argmax order survives re-parsing
        scores: withScores ? [...scores![i]] : undefined,
      });
    }
  }

  get predictionLogPath(): string {
    return path.join(this.outputDir, "predictions.csv");
  }

  get epochLogPath(): string {
    return path.join(this.outputDir, "history.csv");
  }

  get labelMapPath(): string {
    return path.join(this.outputDir, "labels.yaml");
  }

  /** Write everything buffered so far; safe to call repeatedly. */
  flush(): void {
    fs.mkdirSync(this.outputDir, { recursive: true });
    const k = this.labelNames.length;

    if (this.predictions.length > 0) {
      const header = ["true_label", "predicted_label"];
      if (this.scored) {
        for (let i = 0; i < k; i++) header.push(`score_${i}`);
      }
      const lines = [header.join(",")];
      for (const row of this.predictions) {
        const cells = [String(row.trueLabel), String(row.predictedLabel)];
        if (this.scored) {
          for (const s of row.scores!) cells.push(String(s));
        }
        lines.push(cells.join(","));
      }
      fs.writeFileSync(this.predictionLogPath, lines.join("\n") + "\n", "utf-8");
    }

    if (this.epochs.length > 0) {
      const lines = ["epoch,train_loss,val_loss,train_acc,val_acc"];
      for (const row of this.epochs) {
        lines.push(
          [row.epoch, row.trainLoss, row.valLoss, row.trainAcc, row.valAcc].map(String).join(","),
        );
      }
      fs.writeFileSync(this.epochLogPath, lines.join("\n") + "\n", "utf-8");
    }

    const labelLines = this.labelNames.map((name, i) => `- ${i}: ${name}`);
    fs.writeFileSync(this.labelMapPath, labelLines.join("\n") + "\n", "utf-8");
  }

  /**
   * Flush buffers and run `cardsmith generate` as a child process.
   * Returns the CLI's stdout line (output path + manifest hash) on success.
   */
  finalize(configPath: string, version: string, outputPath?: string): string {
    this.flush();
    const out = outputPath ?? path.join(this.outputDir, "model_card.html");
    const result = spawnSync(
      this.cliBinary,
      ["generate", "--config", configPath, "--output", out, "--version", version],
      { encoding: "utf-8" },
    );
    if (result.error !== undefined) {
      const code = (result.error as NodeJS.ErrnoException).code;
      if (code === "ENOENT") {
        throw new CliNotFoundError(`${this.cliBinary} not found on PATH`);
      }
      throw new AdapterError(String(result.error));
    }
    if (result.status !== 0) {
      throw new CliExitError(result.status ?? -1, result.stderr ?? "");
    }
    return (result.stdout ?? "").trim();
  }
}
