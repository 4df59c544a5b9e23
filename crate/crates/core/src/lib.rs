//! Volatility forecasting from prices and headline sentiment: GARCH, SVR and
//! LSTM forecasters, word embeddings and a text CNN for sentiment, and
//! scoring utilities.

pub mod cnn_sentiment;
pub mod eval;
pub mod garch;
pub mod lstm;
pub mod marketdata;
mod optim;
pub mod svr;
pub mod textprep;
pub mod word2vec;
