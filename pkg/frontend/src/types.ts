export type Verdict = "yes" | "no" | "na";

export type Span = [number, number]; // code-point offsets, end exclusive

export interface OutputView {
  label: string;
  translation: string;
  verdict: Verdict | null;
}

export interface ItemPayload {
  item_id: string;
  question: string;
  source: string;
  source_highlights: Span[];
  reference: string;
  reference_highlights: Span[];
  outputs: OutputView[];
  notes?: string;
}

export interface PendingView {
  done: false;
  position: number;
  total_items: number;
  judged_slots: number;
  total_slots: number;
  item: ItemPayload;
}

export interface DoneView {
  done: true;
  judged: number;
  total: number;
  verdicts: Record<Verdict, number>;
}

export type NextView = PendingView | DoneView;

export interface JudgmentAck {
  item_id: string;
  blind_label: string;
  verdict: Verdict;
  revision: number;
}

export interface ProgressPayload {
  annotators: Record<
    string,
    { judged: number; total: number; verdicts: Record<Verdict, number> }
  >;
  verdicts: Record<Verdict, number>;
}
