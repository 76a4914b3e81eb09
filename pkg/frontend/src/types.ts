// Wire types for the gridtalk play service. Keep in sync with the JSON the
// service emits (src/gridtalk/service.py); the client adds nothing.

export type RoleName = 'letters' | 'digits';

export type Cell = {
  row: number;
  col: number;
  color: string;
  shape: string;
  letter?: string; // only the human's own symbol kind until the game ends
  digit?: string;
};

export type MessageJson = { type: 'message'; raw: string; words: string[] };
export type ClickJson = { type: 'click'; row: number; col: number };
export type ActionJson = MessageJson | ClickJson;

// History entries spread the action fields next to t/player.
export type TurnJson = { t: number; player: RoleName } & ActionJson;

export type Scoreboard = {
  correct_clicks: number;
  wrong_clicks: number;
  words_sent: number;
};

export type Outcome = { correct: boolean; clicked: [number, number] };

export type SessionStatus = 'awaiting_human' | 'awaiting_agent' | 'finished';

export type SessionView = {
  id: string;
  status: SessionStatus;
  human_role: RoleName;
  agent: string;
  config: Record<string, unknown>;
  seed: number;
  debug: boolean;
  rows: number;
  cols: number;
  goal: { letter: string; digit: string };
  first_player: RoleName;
  board: Cell[];
  history: TurnJson[];
  scoreboard: Scoreboard;
  outcome?: Outcome;
  utility?: number;
};

export type SessionReply = {
  session: SessionView;
  agent_action: ActionJson | null;
};

export type BeliefsPayload = {
  viewer: RoleName;
  about: RoleName;
  marginals: number[][];
};

export type ErrorBody = { error: { rule: string; message: string } };

export type ActionEvent = {
  id: number;
  type: 'action';
  t: number;
  player: RoleName;
  action: ActionJson;
};

export type OutcomeEvent = {
  id: number;
  type: 'outcome';
  correct: boolean;
  clicked: [number, number];
  utility: number;
};

export type GameEvent = ActionEvent | OutcomeEvent;

export type CreateSessionBody = {
  scenario?: unknown;
  seed?: number;
  human_role?: RoleName;
  agent?: string;
  agent_seed?: number;
  config?: Record<string, unknown>;
  mode?: 'sample' | 'argmax';
  debug?: boolean;
};
