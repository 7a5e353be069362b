# Python dict syntax is accepted as well as JSON.
{
    'level': 'transaction',
    'select': ['input.address.tag.info.account', 'output.address.tag.info.provider', 'self.txes'],
    'where': {
        'input': {'address': {'tag': {'type': 'user'}}},
        'output': {'address': {'tag': {'type': 'service', 'source': 'tor'}}},
    },
    'group_by': ['input.address.tag.info.id', 'output.address.tag.info.id'],
    'clustering': {'source': 'inputs', 'method': 'minimal'},
}
