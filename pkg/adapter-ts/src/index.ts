export {
  AdapterError,
  CliExitError,
  CliNotFoundError,
  LengthMismatchError,
  NonMonotonicEpochError,
  RunRecorder,
  UnknownLabelError,
  ValueOutOfRangeError,
} from "./recorder";
export type { RecorderOptions } from "./recorder";
