//! Mock objects: a small model standing in for the user's model when testing
//! data, and synthetic data standing in for the user's data when testing a
//! model.

mod data;
mod recipe;

pub use data::{
    generate_mock_data, mock_row_count, standardize, MockDataConfig, CENTROID_GAP, LABEL_COLUMN,
    REGRESSION_ROWS_PER_FEATURE, ROWS_PER_CLASS,
};
pub use recipe::{
    build_mock_model, mock_layers, mock_model_recipe, mock_model_spec, MockModelRecipe,
    CNN_FILTERS, CNN_KERNEL,
};
