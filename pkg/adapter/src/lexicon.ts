/** Phrase lists driving the built-in lexical scorer. Kept in sync with the
 * consumer's shipped lexicons so both sides agree on the running examples. */

export const CUE_PHRASES = [
  "if",
  "when",
  "whenever",
  "unless",
  "in case",
  "as soon as",
  "as long as",
  "once",
  "upon",
  "provided that",
  "only if",
  "then",
];

export const NEGATION_PHRASES = [
  "not",
  "no",
  "never",
  "cannot",
  "do not",
  "does not",
  "shall not",
  "must not",
  "will not",
];

export const AUX_VERBS = new Set(
  `is are was were be been being am has have had do does did
   shall should will would can could may might must`.split(/\s+/),
);

export const DETERMINERS = new Set(
  `the a an this that these those each every all any some no
   its his her their our your my such`.split(/\s+/),
);
