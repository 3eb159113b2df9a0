// Typed client for the photochat REST API. All server state flows through
// these calls; the UI never mutates anything except by issuing them.

export interface ProfileDto {
  likes: string[];
  dislikes: string[];
}

export interface FamilyMemberDto {
  name: string;
  relationship: string;
  face_ref?: string | null;
}

export interface UserDto {
  user_id: string;
  display_name: string;
  background: string;
  profile: ProfileDto;
  family: FamilyMemberDto[];
  version?: number;
}

export interface PhotoDto {
  photo_id: string;
  owner: string;
  uploaded_at: number;
  description: string;
  members_present: string[];
  last_discussed_at: number | null;
  discussed_count: number;
  has_image?: boolean;
}

export interface SessionStartDto {
  session_id: string;
  photo: PhotoDto;
  opening_question: string;
  phase: string;
}

export interface ProposalDto {
  photo_id: string;
  description: string;
  members_present: string[];
}

export interface SummaryDto {
  summary_id: string;
  user_id: string;
  session_id: string;
  unparsed: boolean;
  summary: {
    summary_text: string;
    new_profile: ProfileDto;
    target_person: string | null;
    photo_id: string;
    created_at: number;
  };
}

export interface MessageReplyDto {
  session_id: string;
  message: string;
  option: string;
  phase: string;
  effect: string;
  round: number;
  coerced: boolean;
  summary?: SummaryDto;
  proposal?: ProposalDto;
}

export interface TranscriptRowDto {
  round: number;
  role: string;
  question: string;
  option: string;
  message: string;
}

export interface TranscriptDto {
  session_id: string;
  user_id: string;
  photo_id: string;
  phase: string;
  option_history: string[];
  rounds: TranscriptRowDto[];
}

export interface EndSessionDto {
  session_id: string;
  phase: string;
  summary: SummaryDto | null;
}

export interface NewUserInput {
  display_name: string;
  background: string;
  family: { name: string; relationship: string }[];
  profile?: ProfileDto;
}

export class ApiError extends Error {
  constructor(
    public status: number,
    public code: string,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export interface ApiSettings {
  baseUrl: string;
  token?: string;
}

export class ApiClient {
  private fetchFn: FetchLike;

  constructor(
    public settings: ApiSettings,
    fetchFn?: FetchLike,
  ) {
    this.fetchFn = fetchFn ?? ((input, init) => fetch(input, init));
  }

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const headers: Record<string, string> = {};
    if (this.settings.token) headers["Authorization"] = `Bearer ${this.settings.token}`;
    let payload: BodyInit | undefined;
    if (body instanceof FormData) {
      payload = body; // the browser sets the multipart boundary itself
    } else if (body !== undefined) {
      headers["Content-Type"] = "application/json";
      payload = JSON.stringify(body);
    }
    let response: Response;
    try {
      response = await this.fetchFn(this.settings.baseUrl + path, {
        method,
        headers,
        body: payload,
      });
    } catch (err) {
      throw new ApiError(0, "NETWORK", `cannot reach ${this.settings.baseUrl}: ${err}`);
    }
    if (!response.ok) {
      let code = `HTTP_${response.status}`;
      let detail = response.statusText;
      try {
        const parsed = await response.json();
        code = parsed.code ?? code;
        detail = parsed.detail ?? detail;
      } catch {
        // non-JSON error body; keep the status text
      }
      throw new ApiError(response.status, code, detail);
    }
    return (await response.json()) as T;
  }

  health(): Promise<{ status: string }> {
    return this.request("GET", "/api/health");
  }

  createUser(input: NewUserInput): Promise<UserDto> {
    return this.request("POST", "/api/users", input);
  }

  getUser(userId: string): Promise<UserDto> {
    return this.request("GET", `/api/users/${encodeURIComponent(userId)}`);
  }

  listPhotos(userId: string): Promise<PhotoDto[]> {
    return this.request("GET", `/api/users/${encodeURIComponent(userId)}/photos`);
  }

  uploadPhoto(
    userId: string,
    input: { description: string; members: string[]; image?: File | Blob },
  ): Promise<PhotoDto> {
    const form = new FormData();
    form.set("description", input.description);
    form.set("members", JSON.stringify(input.members));
    if (input.image) form.set("image", input.image);
    return this.request("POST", `/api/users/${encodeURIComponent(userId)}/photos`, form);
  }

  importMessages(userId: string, messages: string[]): Promise<PhotoDto> {
    return this.request("POST", `/api/users/${encodeURIComponent(userId)}/imports/messages`, {
      messages,
    });
  }

  listSummaries(userId: string): Promise<SummaryDto[]> {
    return this.request("GET", `/api/users/${encodeURIComponent(userId)}/summaries`);
  }

  startSession(userId: string, photoId?: string): Promise<SessionStartDto> {
    return this.request("POST", `/api/users/${encodeURIComponent(userId)}/sessions`, {
      photo_id: photoId ?? null,
    });
  }

  sendMessage(sessionId: string, text: string): Promise<MessageReplyDto> {
    return this.request("POST", `/api/sessions/${encodeURIComponent(sessionId)}/messages`, {
      text,
    });
  }

  endSession(sessionId: string): Promise<EndSessionDto> {
    return this.request("POST", `/api/sessions/${encodeURIComponent(sessionId)}/end`);
  }

  getTranscript(sessionId: string): Promise<TranscriptDto> {
    return this.request("GET", `/api/sessions/${encodeURIComponent(sessionId)}`);
  }

  async photoImage(photoId: string): Promise<Blob | null> {
    const headers: Record<string, string> = {};
    if (this.settings.token) headers["Authorization"] = `Bearer ${this.settings.token}`;
    const response = await this.fetchFn(
      `${this.settings.baseUrl}/api/photos/${encodeURIComponent(photoId)}/image`,
      { method: "GET", headers },
    );
    if (!response.ok) return null;
    return response.blob();
  }
}
