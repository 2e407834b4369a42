"""Service layer for the relay secrecy simulator: channels, precoding, rates, buffers, selection and the slot engine."""
