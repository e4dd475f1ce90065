/** Built-in lexical extraction engine.
 *
 * Emits per-token probability maps over the twelve labels in the same shape a
 * sigmoid token classifier would produce; the adapter then applies the 0.5
 * threshold and keeps the highest-scoring top-layer label. The scores come
 * from surface patterns (cue phrases, clause boundaries, coordinations), so
 * they are deterministic and calibrated only in the loosest sense.
 */

import { AUX_VERBS, CUE_PHRASES, DETERMINERS, NEGATION_PHRASES } from "./lexicon.js";
import type { LowerLabel, TopLabel } from "./schema.js";

export interface Token {
  index: number;
  text: string;
  start: number;
  end: number;
}

const TOKEN_RE = /\w+(?:[-/'.]\w+)*|[^\w\s]/g;

export function tokenize(text: string): Token[] {
  const tokens: Token[] = [];
  for (const match of text.matchAll(TOKEN_RE)) {
    tokens.push({
      index: tokens.length,
      text: match[0],
      start: match.index ?? 0,
      end: (match.index ?? 0) + match[0].length,
    });
  }
  return tokens;
}

export interface TokenScores {
  top: Map<TopLabel, number>;
  lower: Map<LowerLabel, number>;
}

const CHOSEN_TOP = 0.96;
const CHOSEN_LOWER = 0.94;
const OTHER = 0.02;

function isWord(text: string): boolean {
  return /[A-Za-z0-9]/.test(text);
}

function matchPhraseAt(words: string[], pos: number, phrase: string): number {
  const parts = phrase.split(" ");
  if (pos + parts.length > words.length) return 0;
  for (let k = 0; k < parts.length; k += 1) {
    if (words[pos + k] !== parts[k]) return 0;
  }
  return parts.length;
}

function findPhrases(
  words: string[],
  phrases: string[],
  start: number,
  stop: number,
): Array<[number, number]> {
  const ordered = [...phrases].sort((a, b) => b.split(" ").length - a.split(" ").length);
  const out: Array<[number, number]> = [];
  let i = start;
  while (i < stop) {
    let advanced = false;
    for (const phrase of ordered) {
      const n = matchPhraseAt(words, i, phrase);
      if (n > 0 && i + n <= stop) {
        out.push([i, i + n]);
        i += n;
        advanced = true;
        break;
      }
    }
    if (!advanced) i += 1;
  }
  return out;
}

function trim(tokens: Token[], indices: number[]): number[] {
  const out = [...indices];
  while (out.length > 0 && !isWord(tokens[out[0]].text)) out.shift();
  while (out.length > 0 && !isWord(tokens[out[out.length - 1]].text)) out.pop();
  return out;
}

function stripLeadingCues(tokens: Token[], segment: number[], cues: string[]): number[] {
  const words = segment.map((i) => tokens[i].text.toLowerCase());
  const ordered = [...cues].sort((a, b) => b.split(" ").length - a.split(" ").length);
  let pos = 0;
  for (;;) {
    let n = 0;
    for (const phrase of ordered) {
      n = matchPhraseAt(words, pos, phrase);
      if (n > 0) break;
    }
    if (n === 0) break;
    pos += n;
  }
  return segment.slice(pos);
}

function variableBoundary(words: string[]): number {
  const lowered = words.map((w) => w.toLowerCase());
  for (let k = 0; k < words.length; k += 1) {
    const word = words[k];
    const low = lowered[k];
    if (!isWord(word)) return k;
    if (AUX_VERBS.has(low)) return k;
    if (k === 0 && !DETERMINERS.has(low) && words.length > 1 && DETERMINERS.has(lowered[1])) {
      return k;
    }
    if (
      k > 0 &&
      word === low &&
      word.length >= 3 &&
      word.endsWith("s") &&
      !word.endsWith("ss") &&
      !word.endsWith("us") &&
      !word.endsWith("is") &&
      !DETERMINERS.has(lowered[k - 1])
    ) {
      return k;
    }
  }
  return words.length;
}

interface Assignment {
  top: TopLabel;
  lower: LowerLabel | null;
}

function labelSegment(
  tokens: Token[],
  segment: number[],
  label: TopLabel,
  out: Array<Assignment | null>,
): void {
  const words = segment.map((i) => tokens[i].text);
  let boundary = variableBoundary(words);
  if (boundary === segment.length) boundary = 0;
  segment.forEach((tokIndex, pos) => {
    out[tokIndex] = { top: label, lower: pos < boundary ? "Variable" : "Condition" };
  });
  const tail = segment.slice(boundary);
  const tailWords = tail.map((i) => tokens[i].text.toLowerCase());
  for (const [s, e] of findPhrases(tailWords, NEGATION_PHRASES, 0, tailWords.length)) {
    for (let k = s; k < e; k += 1) {
      out[tail[k]] = { top: label, lower: "Negation" };
    }
  }
}

function splitSegments(
  tokens: Token[],
  region: number[],
): { segments: number[][]; connectives: Array<[number, TopLabel]> } {
  const segments: number[][] = [];
  const connectives: Array<[number, TopLabel]> = [];
  let current: number[] = [];
  let pending: [number, TopLabel] | null = null;

  const close = (next: [number, TopLabel] | null) => {
    const trimmed = trim(tokens, current);
    if (trimmed.length > 0) {
      if (segments.length > 0 && pending !== null) connectives.push(pending);
      segments.push(trimmed);
      pending = next;
    }
    current = [];
  };

  for (const idx of region) {
    const word = tokens[idx].text.toLowerCase();
    if (word === "and") close([idx, "And"]);
    else if (word === "or") close([idx, "Or"]);
    else current.push(idx);
  }
  close(null);
  return { segments, connectives };
}

interface Regions {
  causes: number[][];
  effects: number[][];
}

function mainClauseStart(words: string[], searchFrom: number): number | null {
  let seenVerb = false;
  for (let i = searchFrom; i < words.length; i += 1) {
    if (AUX_VERBS.has(words[i])) {
      seenVerb = true;
      continue;
    }
    if (seenVerb && DETERMINERS.has(words[i])) return i;
  }
  return null;
}

function findRegions(tokens: Token[], causeCues: string[]): Regions | null {
  const words = tokens.map((t) => t.text.toLowerCase());
  const n = tokens.length;
  const cues = findPhrases(words, causeCues, 0, n);
  if (cues.length === 0) return null;

  const regions: Regions = { causes: [], effects: [] };
  const initial = cues.find((c) => c[0] === 0) ?? null;
  let restStart = 0;
  if (initial !== null) {
    let boundary: number | null = null;
    for (let i = initial[1]; i < n; i += 1) {
      if (words[i] === "," || words[i] === "then") {
        boundary = i;
        break;
      }
    }
    let consequentStart: number;
    if (boundary !== null) {
      consequentStart = boundary + 1;
      if (consequentStart < n && words[consequentStart] === "then") consequentStart += 1;
    } else {
      const start = mainClauseStart(words, initial[1]);
      if (start === null) return null;
      boundary = start;
      consequentStart = start;
    }
    const cause = trim(tokens, range(initial[1], boundary));
    if (cause.length > 0) regions.causes.push(cause);
    restStart = consequentStart;
  }

  const later = cues.filter((c) => c[0] >= restStart);
  const stops = [...later.map((c) => c[0]), n];
  const main = trim(tokens, range(restStart, stops[0]));
  if (main.length > 0) regions.effects.push(main);
  later.forEach(([, cueEnd], k) => {
    const region = trim(tokens, range(cueEnd, stops[k + 1]));
    if (region.length > 0) regions.causes.push(region);
  });
  if (regions.causes.length === 0 || regions.effects.length === 0) return null;
  return regions;
}

function relativeClauseRegions(tokens: Token[]): Regions | null {
  const words = tokens.map((t) => t.text.toLowerCase());
  const rel = words.findIndex((w) => w === "that" || w === "which");
  if (rel <= 0) return null;
  const negations = findPhrases(
    words,
    NEGATION_PHRASES,
    rel + 1,
    Math.min(rel + 4, words.length),
  );
  if (negations.length === 0) return null;
  const modal = words.findIndex(
    (w, i) => i > rel && (w === "shall" || w === "must" || w === "will" || w === "should"),
  );
  if (modal === -1) return null;
  const subject = trim(tokens, range(0, rel));
  const clause = trim(tokens, range(rel + 1, modal));
  const effect = trim(tokens, range(modal, tokens.length));
  if (subject.length === 0 || clause.length === 0 || effect.length === 0) return null;
  return { causes: [[...subject, ...clause]], effects: [effect] };
}

function range(start: number, stop: number): number[] {
  const out: number[] = [];
  for (let i = start; i < stop; i += 1) out.push(i);
  return out;
}

function lexicalAssignments(tokens: Token[]): Array<Assignment | null> {
  const causeCues = CUE_PHRASES.filter((p) => p !== "then");
  const out: Array<Assignment | null> = tokens.map(() => null);
  const regions = findRegions(tokens, causeCues) ?? relativeClauseRegions(tokens);
  if (regions === null) return out;

  (["cause", "effect"] as const).forEach((role) => {
    const regionList = role === "cause" ? regions.causes : regions.effects;
    let ordinal = 0;
    for (const region of regionList) {
      const { segments, connectives } = splitSegments(tokens, region);
      for (let segment of segments) {
        if (role === "cause") {
          segment = stripLeadingCues(tokens, segment, causeCues);
          if (segment.length === 0) continue;
        }
        ordinal += 1;
        if (ordinal > 3) return;
        const label = ((role === "cause" ? "Cause" : "Effect") + ordinal) as TopLabel;
        labelSegment(tokens, segment, label, out);
      }
      for (const [idx, conn] of connectives) {
        out[idx] = { top: conn, lower: null };
      }
    }
  });
  return out;
}

/** Probability maps per token, mimicking a sigmoid classifier's output. */
export function scoreTokens(text: string): { tokens: Token[]; scores: TokenScores[] } {
  const tokens = tokenize(text);
  const assignments = lexicalAssignments(tokens);
  const scores = assignments.map((assignment) => {
    const top = new Map<TopLabel, number>();
    const lower = new Map<LowerLabel, number>();
    const chosenTop = assignment?.top ?? "NotRelevant";
    for (const label of [
      "Cause1",
      "Cause2",
      "Cause3",
      "Effect1",
      "Effect2",
      "Effect3",
      "NotRelevant",
      "And",
      "Or",
    ] as TopLabel[]) {
      top.set(label, label === chosenTop ? CHOSEN_TOP : OTHER);
    }
    for (const label of ["Variable", "Condition", "Negation"] as LowerLabel[]) {
      lower.set(label, label === assignment?.lower ? CHOSEN_LOWER : OTHER);
    }
    return { top, lower };
  });
  return { tokens, scores };
}

export interface DecodedToken {
  top: TopLabel;
  lower: LowerLabel | null;
}

/** Threshold rule: classes with probability >= threshold survive; if several
 * top-layer labels survive only the highest is kept; without a surviving
 * cause/effect/connective label the token is NotRelevant. Lower labels only
 * attach under a cause/effect top label. */
export function decodeToken(scores: TokenScores, threshold: number): DecodedToken {
  let top: TopLabel = "NotRelevant";
  let best = -1;
  for (const [label, p] of scores.top) {
    if (p >= threshold && p > best) {
      top = label;
      best = p;
    }
  }
  let lower: LowerLabel | null = null;
  if (top.startsWith("Cause") || top.startsWith("Effect")) {
    let bestLower = -1;
    for (const [label, p] of scores.lower) {
      if (p >= threshold && p > bestLower) {
        lower = label;
        bestLower = p;
      }
    }
  }
  return { top, lower };
}
