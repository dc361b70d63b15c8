/** Client-side UI state: append-only chat log, validated annotations,
 * stream graph and report preview. No numbers are computed here; everything
 * displayed originates from an API response. */

import type {
  Annotation,
  ChatEntry,
  ChatKind,
  SpecDocument,
  StreamResponse,
  Triple,
} from './types';

export interface PreviewFrame {
  title: string;
  bullets: string[];
  imageName: string | null;
}

type Listener = () => void;

export class UiState {
  sessionId: string | null = null;
  spec: SpecDocument | null = null;
  readonly chatLog: ChatEntry[] = [];
  annotations: Annotation[] = [];
  streamRounds: StreamResponse['rounds'] = [];
  reportPreview: PreviewFrame[] = [];
  streamVisible = false; // hidden by default, toggled from the menu

  private listeners: Listener[] = [];

  subscribe(listener: Listener): void {
    this.listeners.push(listener);
  }

  private emit(): void {
    for (const listener of this.listeners) listener();
  }

  appendChat(role: ChatEntry['role'], kind: ChatKind, text: string,
             payload?: unknown): void {
    // Append-only by contract: entries are never edited or removed.
    this.chatLog.push({ role, kind, text, payload });
    this.emit();
  }

  /** Keep only annotations whose triple resolves against the loaded spec. */
  setAnnotations(candidates: Annotation[]): void {
    this.annotations = candidates.filter((a) => this.tripleValid(a));
    this.emit();
  }

  filterAnnotations(predicate: (a: Annotation) => boolean): void {
    this.annotations = this.annotations.filter(predicate);
    this.emit();
  }

  clearAnnotations(): void {
    this.annotations = [];
    this.emit();
  }

  tripleValid(triple: Triple): boolean {
    if (!this.spec) return false;
    const view = this.spec.viewsInfo.find((v) => v.viewName === triple.viewName);
    if (!view) return false;
    const fields = new Set<string>();
    for (const layer of view.layers) {
      for (const ref of Object.values(layer.encoding)) fields.add(ref.field);
    }
    for (const item of view.tooltip ?? []) {
      if (typeof item === 'string') fields.add(item);
    }
    return fields.has(triple.dimName);
  }

  setStream(rounds: StreamResponse['rounds']): void {
    this.streamRounds = rounds;
    this.emit();
  }

  toggleStream(): void {
    this.streamVisible = !this.streamVisible;
    this.emit();
  }

  setReportPreview(frames: PreviewFrame[]): void {
    this.reportPreview = frames;
    this.emit();
  }
}

/** Frame structure out of beamer source, for the preview pane. */
export function framesFromTex(tex: string): PreviewFrame[] {
  const frames: PreviewFrame[] = [];
  const frameRe = /\\begin\{frame\}(?:\{([^}]*)\})?([\s\S]*?)\\end\{frame\}/g;
  let match: RegExpExecArray | null;
  while ((match = frameRe.exec(tex)) !== null) {
    const body = match[2] ?? '';
    const bullets: string[] = [];
    const itemRe = /\\item\s+([^\n]*)/g;
    let item: RegExpExecArray | null;
    while ((item = itemRe.exec(body)) !== null) bullets.push(item[1].trim());
    const image = /\\includegraphics[^{]*\{"?([^"}]+)"?\}/.exec(body);
    frames.push({
      title: match[1] ?? (body.includes('\\titlepage') ? 'Title' : ''),
      bullets,
      imageName: image ? image[1] : null,
    });
  }
  return frames;
}
