/**
 * Annotation UI: shows one candidate pair at a time, takes a verdict with
 * one click or keystroke, and advances.
 *
 * All data comes from the annotation service; nothing is computed client
 * side. A verdict is only treated as saved once the service acknowledges
 * it: while a request is in flight further input is ignored, and a failed
 * request keeps the verdict locally and offers a retry.
 */

export type Verdict = "duplicate" | "not_duplicate" | "unsure";

export interface Progress {
  total: number;
  labeled_any: number;
  labeled_by_rater: Record<string, number>;
}

export interface Distances {
  lev_norm: number;
  cosine_dist: number;
  embed_dist: number | null;
}

export interface PairPayload {
  done: false;
  left_id: string;
  right_id: string;
  left_title: string;
  right_title: string;
  left_source: string;
  right_source: string;
  distances: Distances | null;
  progress: Progress;
}

export interface DonePayload {
  done: true;
  progress: Progress;
}

export type NextResponse = PairPayload | DonePayload;

export interface AnnotationApi {
  fetchNext(rater: string): Promise<NextResponse>;
  submitLabel(
    rater: string,
    leftId: string,
    rightId: string,
    verdict: Verdict,
  ): Promise<void>;
}

export class HttpApi implements AnnotationApi {
  constructor(
    private readonly base: string = "",
    private readonly fetchFn: typeof fetch = globalThis.fetch.bind(globalThis),
  ) {}

  async fetchNext(rater: string): Promise<NextResponse> {
    const response = await this.fetchFn(
      `${this.base}/api/next?rater=${encodeURIComponent(rater)}`,
    );
    if (!response.ok) {
      throw new Error(`next pair request failed (${response.status})`);
    }
    return (await response.json()) as NextResponse;
  }

  async submitLabel(
    rater: string,
    leftId: string,
    rightId: string,
    verdict: Verdict,
  ): Promise<void> {
    const response = await this.fetchFn(`${this.base}/api/label`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({
        rater,
        left_id: leftId,
        right_id: rightId,
        verdict,
      }),
    });
    if (!response.ok) {
      throw new Error(`label request failed (${response.status})`);
    }
    const body = (await response.json()) as { ok?: boolean };
    if (body.ok !== true) {
      throw new Error("label request was not acknowledged");
    }
  }
}

const RATER_STORAGE_KEY = "dupfinder.rater";

const KEY_TO_VERDICT: Record<string, Verdict> = {
  d: "duplicate",
  n: "not_duplicate",
  u: "unsure",
};

type StorageLike = Pick<Storage, "getItem" | "setItem">;

const SKELETON = `
<header class="app-header">
  <h1>Title pair annotation</h1>
  <span id="progress" class="progress"></span>
</header>
<section id="name-view" hidden>
  <label for="rater-input">Your rater name</label>
  <input id="rater-input" type="text" autocomplete="off" placeholder="e.g. ada" />
  <button id="start-button" type="button">Start labeling</button>
</section>
<section id="pair-view" hidden>
  <div class="pair-cards">
    <article class="title-card">
      <p id="left-title" class="title-text"></p>
      <p class="source">source: <span id="left-source"></span></p>
    </article>
    <article class="title-card">
      <p id="right-title" class="title-text"></p>
      <p class="source">source: <span id="right-source"></span></p>
    </article>
  </div>
  <div id="distances-block" hidden>
    <label class="toggle">
      <input id="distances-toggle" type="checkbox" />
      show distance context
    </label>
    <dl id="distances-panel" class="distances" hidden>
      <dt>edit</dt><dd id="dist-lev"></dd>
      <dt>cosine</dt><dd id="dist-cos"></dd>
      <dt>embedding</dt><dd id="dist-embed"></dd>
    </dl>
  </div>
  <div class="verdict-buttons">
    <button id="btn-duplicate" type="button">Duplicate <kbd>D</kbd></button>
    <button id="btn-not" type="button">Not duplicate <kbd>N</kbd></button>
    <button id="btn-unsure" type="button">Unsure <kbd>U</kbd></button>
  </div>
</section>
<section id="done-view" hidden>
  <h2>All pairs labeled</h2>
  <p id="done-progress"></p>
</section>
<div id="error-banner" class="error-banner" hidden>
  <span id="error-text"></span>
  <button id="retry-button" type="button">Retry</button>
</div>
`;

export class AnnotationApp {
  private rater = "";
  private current: PairPayload | null = null;
  private doneProgress: Progress | null = null;
  private inFlight = false;
  private pendingVerdict: Verdict | null = null;
  private errorMessage: string | null = null;
  private showDistances = false;

  constructor(
    private readonly root: HTMLElement,
    private readonly api: AnnotationApi,
    private readonly storage: StorageLike = window.localStorage,
  ) {
    this.rater = this.storage.getItem(RATER_STORAGE_KEY) ?? "";
  }

  mount(): void {
    this.root.innerHTML = SKELETON;
    this.el("start-button").addEventListener("click", () => {
      void this.start();
    });
    (this.el("rater-input") as HTMLInputElement).addEventListener(
      "keydown",
      (event) => {
        if ((event as KeyboardEvent).key === "Enter") void this.start();
      },
    );
    this.el("btn-duplicate").addEventListener("click", () => {
      void this.submit("duplicate");
    });
    this.el("btn-not").addEventListener("click", () => {
      void this.submit("not_duplicate");
    });
    this.el("btn-unsure").addEventListener("click", () => {
      void this.submit("unsure");
    });
    this.el("retry-button").addEventListener("click", () => {
      void this.retry();
    });
    this.el("distances-toggle").addEventListener("change", (event) => {
      this.showDistances = (event.target as HTMLInputElement).checked;
      this.render();
    });
    this.root.ownerDocument.addEventListener("keydown", (event) => {
      this.onKeydown(event as KeyboardEvent);
    });
    this.render();
    if (this.rater) {
      void this.advance();
    }
  }

  private el(id: string): HTMLElement {
    const found = this.root.querySelector(`#${id}`);
    if (!found) throw new Error(`missing element #${id}`);
    return found as HTMLElement;
  }

  private async start(): Promise<void> {
    const name = (this.el("rater-input") as HTMLInputElement).value.trim();
    if (!name) return;
    this.rater = name;
    this.storage.setItem(RATER_STORAGE_KEY, name);
    await this.advance();
  }

  /** Fetch the next pair for this rater; never skips on failure. */
  private async advance(): Promise<void> {
    if (this.inFlight) return;
    this.inFlight = true;
    this.render();
    try {
      const next = await this.api.fetchNext(this.rater);
      if (next.done) {
        this.current = null;
        this.doneProgress = next.progress;
      } else {
        this.current = next;
      }
      this.errorMessage = null;
    } catch (error) {
      this.errorMessage = `Could not reach the annotation service: ${String(error)}`;
    } finally {
      this.inFlight = false;
      this.render();
    }
  }

  /**
   * Post a verdict for the displayed pair. Ignored while a request is in
   * flight; on failure the verdict is retained for retry and the pair is
   * not advanced past.
   */
  async submit(verdict: Verdict): Promise<void> {
    if (!this.current || this.inFlight) return;
    this.pendingVerdict = verdict;
    this.inFlight = true;
    this.render();
    try {
      await this.api.submitLabel(
        this.rater,
        this.current.left_id,
        this.current.right_id,
        verdict,
      );
      this.pendingVerdict = null;
      this.errorMessage = null;
      this.inFlight = false;
      await this.advance();
    } catch (error) {
      this.inFlight = false;
      this.errorMessage = `Verdict not saved: ${String(error)}`;
      this.render();
    }
  }

  private async retry(): Promise<void> {
    if (this.inFlight) return;
    this.errorMessage = null;
    if (this.pendingVerdict && this.current) {
      const verdict = this.pendingVerdict;
      this.pendingVerdict = null;
      await this.submit(verdict);
    } else {
      await this.advance();
    }
  }

  private onKeydown(event: KeyboardEvent): void {
    if (!this.current || this.inFlight) return;
    const target = event.target as HTMLElement | null;
    if (target && target.tagName === "INPUT" && target.id === "rater-input") {
      return;
    }
    const verdict = KEY_TO_VERDICT[event.key.toLowerCase()];
    if (verdict) void this.submit(verdict);
  }

  private render(): void {
    const nameView = this.el("name-view");
    const pairView = this.el("pair-view");
    const doneView = this.el("done-view");
    nameView.hidden = !(this.rater === "" && !this.current && !this.doneProgress);
    pairView.hidden = this.current === null;
    doneView.hidden = this.doneProgress === null;

    const banner = this.el("error-banner");
    banner.hidden = this.errorMessage === null;
    if (this.errorMessage !== null) {
      this.el("error-text").textContent = this.errorMessage;
    }

    if (this.current) {
      this.el("left-title").textContent = this.current.left_title;
      this.el("right-title").textContent = this.current.right_title;
      this.el("left-source").textContent = this.current.left_source;
      this.el("right-source").textContent = this.current.right_source;
      this.renderProgress(this.current.progress);
      this.renderDistances(this.current.distances);
      for (const id of ["btn-duplicate", "btn-not", "btn-unsure"]) {
        (this.el(id) as HTMLButtonElement).disabled = this.inFlight;
      }
    }
    if (this.doneProgress) {
      this.renderProgress(this.doneProgress);
      const mine = this.doneProgress.labeled_by_rater[this.rater] ?? 0;
      this.el("done-progress").textContent =
        `You labeled ${mine} of ${this.doneProgress.total} pairs. ` +
        `Across all raters ${this.doneProgress.labeled_any} pairs have at ` +
        `least one verdict.`;
    }
  }

  private renderProgress(progress: Progress): void {
    const mine = progress.labeled_by_rater[this.rater] ?? 0;
    this.el("progress").textContent =
      `${mine}/${progress.total} labeled by you`;
  }

  private renderDistances(distances: Distances | null): void {
    const block = this.el("distances-block");
    block.hidden = distances === null;
    if (distances === null) return;
    const panel = this.el("distances-panel");
    panel.hidden = !this.showDistances;
    (this.el("distances-toggle") as HTMLInputElement).checked =
      this.showDistances;
    if (this.showDistances) {
      this.el("dist-lev").textContent = distances.lev_norm.toFixed(3);
      this.el("dist-cos").textContent = distances.cosine_dist.toFixed(3);
      this.el("dist-embed").textContent =
        distances.embed_dist === null ? "n/a" : distances.embed_dist.toFixed(3);
    }
  }
}
