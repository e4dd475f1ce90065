import { z } from "zod";

/** One requirement per line of the input JSON-lines file. */
export const RequirementSchema = z.object({
  id: z.string().min(1),
  text: z.string().min(1),
  source: z.string().nullable().optional(),
});
export type Requirement = z.infer<typeof RequirementSchema>;

/** Detection interchange: one record per requirement, argmax label plus its
 * probability. */
export const VerdictRecordSchema = z.object({
  id: z.string(),
  causal: z.boolean(),
  confidence: z.number().min(0).max(1),
});
export const VerdictStreamSchema = z.array(VerdictRecordSchema);
export type VerdictRecord = z.infer<typeof VerdictRecordSchema>;

export const TOP_LABELS = [
  "Cause1",
  "Cause2",
  "Cause3",
  "Effect1",
  "Effect2",
  "Effect3",
  "NotRelevant",
  "And",
  "Or",
] as const;
export const LOWER_LABELS = ["Variable", "Condition", "Negation"] as const;
export type TopLabel = (typeof TOP_LABELS)[number];
export type LowerLabel = (typeof LOWER_LABELS)[number];

/** Extraction interchange: labeled spans with character offsets, ready for
 * subword reassembly on the consumer side. */
export const TokenRecordSchema = z.object({
  text: z.string(),
  start: z.number().int().nonnegative(),
  end: z.number().int().positive(),
  top: z.enum(TOP_LABELS),
  lower: z.enum(LOWER_LABELS).nullable(),
});
export const LabelRecordSchema = z.object({
  id: z.string(),
  tokens: z.array(TokenRecordSchema),
});
export const LabelStreamSchema = z.array(LabelRecordSchema);
export type LabelRecord = z.infer<typeof LabelRecordSchema>;
