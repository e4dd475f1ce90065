/** Inference backend selection.
 *
 * The published pretrained checkpoints are not bundled; when a model
 * directory is supplied it must contain loadable weights, otherwise loading
 * fails loudly. Without one, the deterministic lexical engine stands in: it
 * speaks the exact interchange contracts and reproduces the running examples,
 * but it is a pattern scorer, not the trained transformer (documented
 * fidelity limitation).
 */

import { existsSync } from "node:fs";

import { scoreTokens, decodeToken, type Token } from "./extract.js";
import { CUE_PHRASES } from "./lexicon.js";
import type { LabelRecord, Requirement, VerdictRecord } from "./schema.js";

export class ModelLoadError extends Error {}

export interface AdapterConfig {
  detectionModel: string;
  extractionModel: string;
  maxDetectionTokens: number;
  maxExtractionTokens: number;
  device: string;
  extractionThreshold: number;
}

export const DEFAULT_CONFIG: AdapterConfig = {
  detectionModel: "builtin-lexical",
  extractionModel: "builtin-lexical",
  maxDetectionTokens: 384,
  maxExtractionTokens: 80,
  device: "cpu",
  extractionThreshold: 0.5,
};

export interface Backend {
  detect(requirements: Requirement[]): VerdictRecord[];
  extract(requirements: Requirement[]): LabelRecord[];
}

export function loadBackend(config: AdapterConfig, modelDir: string | null): Backend {
  if (modelDir !== null) {
    if (!existsSync(modelDir)) {
      throw new ModelLoadError(`model directory not found: ${modelDir}`);
    }
    throw new ModelLoadError(
      `cannot load transformer weights from ${modelDir}: no inference runtime ` +
        "is bundled with this adapter; run without --model-dir to use the " +
        "built-in lexical engine",
    );
  }
  return new LexicalBackend(config);
}

/** Two-class softmax over cue evidence: strong logit when a cue phrase is
 * present, its negation otherwise. */
function cueSoftmax(text: string): { causal: boolean; confidence: number } {
  const escaped = CUE_PHRASES.map((p) => p.split(" ").map(escapeRe).join("\\s+"));
  const pattern = new RegExp(`\\b(?:${escaped.join("|")})\\b`, "i");
  const logit = pattern.test(text) ? 2.0 : -2.0;
  const pCausal = Math.exp(logit) / (Math.exp(logit) + Math.exp(-logit));
  const causal = pCausal >= 0.5;
  return { causal, confidence: causal ? pCausal : 1 - pCausal };
}

function escapeRe(text: string): string {
  return text.replace(/[.*+?^${}()|[\]\\]/g, "\\$&");
}

export class LexicalBackend implements Backend {
  constructor(private config: AdapterConfig) {}

  detect(requirements: Requirement[]): VerdictRecord[] {
    return requirements.map((r) => {
      const words = r.text.split(/\s+/).filter(Boolean);
      if (words.length > this.config.maxDetectionTokens) {
        process.stderr.write(
          `warning: ${r.id} exceeds ${this.config.maxDetectionTokens} tokens, truncated\n`,
        );
      }
      const kept = words.slice(0, this.config.maxDetectionTokens).join(" ");
      const { causal, confidence } = cueSoftmax(kept);
      return { id: r.id, causal, confidence };
    });
  }

  extract(requirements: Requirement[]): LabelRecord[] {
    return requirements.map((r) => {
      const { tokens, scores } = scoreTokens(r.text);
      let kept: Token[] = tokens;
      if (tokens.length > this.config.maxExtractionTokens) {
        process.stderr.write(
          `warning: ${r.id} exceeds ${this.config.maxExtractionTokens} tokens, truncated\n`,
        );
        kept = tokens.slice(0, this.config.maxExtractionTokens);
      }
      return {
        id: r.id,
        tokens: kept.map((tok, i) => {
          const decoded = decodeToken(scores[i], this.config.extractionThreshold);
          return {
            text: tok.text,
            start: tok.start,
            end: tok.end,
            top: decoded.top,
            lower: decoded.lower,
          };
        }),
      };
    });
  }
}
